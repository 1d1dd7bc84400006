use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psl2_core::numtheory::{phi, prime_power};
use psl2_core::products::{is_singular, realize_trace_triple, subgroup_kind, SubgroupTag};
use psl2_core::*;

const SMALL_Q: &[u64] = &[2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27];
const FIELD_Q: &[u64] = &[
    2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 37, 41, 43, 47, 49,
];

fn field(q: u64) -> FieldCtx {
    let (p, e) = prime_power(q).unwrap();
    make_field(p, e).unwrap()
}

fn q_and_elem(qs: &'static [u64]) -> impl Strategy<Value = (u64, u64)> {
    prop::sample::select(qs).prop_flat_map(|q| (Just(q), 0..q))
}

proptest! {
    #[test]
    fn square_classes_partition((q, a) in q_and_elem(FIELD_Q)) {
        let f = field(q);
        prop_assume!(f.is_odd() && a != 0);
        let a = f.from_enc(a).unwrap();
        let nu = f.nonsquare().unwrap();
        prop_assert!(f.is_square(a) ^ f.is_square(f.mul(nu, a)));
    }

    #[test]
    fn sqrt_matches_is_square((q, a) in q_and_elem(FIELD_Q)) {
        let f = field(q);
        let a = f.from_enc(a).unwrap();
        match f.sqrt(a) {
            Some(r) => prop_assert_eq!(f.mul(r, r), a),
            None => prop_assert!(!f.is_square(a)),
        }
        prop_assert_eq!(f.sqrt(a).is_some(), f.is_square(a));
    }

    #[test]
    fn quadratic_solver_matches_scan(qi in 0..FIELD_Q.len(), b in any::<u64>(), c in any::<u64>()) {
        let q = FIELD_Q[qi];
        let f = field(q);
        let b = f.from_enc(b % q).unwrap();
        let c = f.from_enc(c % q).unwrap();
        let scan: BTreeSet<Fe> = f.elements().filter(|&z| f.add(f.add(f.mul(z, z), f.mul(b, z)), c) == f.zero()).collect();
        prop_assert_eq!(f.solve_monic_quadratic(b, c), scan);
    }

    #[test]
    fn primitive_root_counts(qi in 0..FIELD_Q.len(), n in 1u64..60) {
        let f = field(FIELD_Q[qi]);
        let roots = ff::primitive_roots(&f, n);
        let expected = if (f.q() - 1).is_multiple_of(n) { phi(n) } else { 0 };
        prop_assert_eq!(roots.len() as u64, expected);
    }

    #[test]
    fn canon_idempotent_and_sign_blind(qi in 0..SMALL_Q.len(), seed in any::<u64>()) {
        let ctx = GroupCtx::new(SMALL_Q[qi]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = ctx.random_sl2(&mut rng);
        let x = ctx.canon(&m);
        prop_assert_eq!(ctx.canon(&x.rep()), x);
        prop_assert_eq!(ctx.canon(&ctx.mat_neg(&m)), x);
    }

    #[test]
    fn order_matches_type(qi in 0..SMALL_Q.len(), seed in any::<u64>()) {
        let ctx = GroupCtx::new(SMALL_Q[qi]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ctx.random_elem(&mut rng);
        let n = ctx.order_of(&x);
        let (q, d, p) = (ctx.q(), ctx.d(), ctx.p());
        prop_assert!(ctx.is_identity(&ctx.pow(&x, n)));
        match ctx.elem_type(&x) {
            ElemType::Identity => prop_assert_eq!(n, 1),
            ElemType::Unipotent => prop_assert_eq!(n, p),
            ElemType::SplitSs => prop_assert_eq!(((q - 1) / d) % n, 0),
            ElemType::NonsplitSs => prop_assert_eq!(((q + 1) / d) % n, 0),
        }
    }

    #[test]
    fn make_field_deterministic(qi in 0..FIELD_Q.len()) {
        let (p, e) = prime_power(FIELD_Q[qi]).unwrap();
        let (f1, f2) = (make_field(p, e).unwrap(), make_field(p, e).unwrap());
        prop_assert_eq!(f1.defining_poly(), f2.defining_poly());
    }
}

#[test]
fn class_id_is_conjugation_invariant() {
    for &q in SMALL_Q {
        let ctx = GroupCtx::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        for _ in 0..1000 {
            let x = ctx.random_elem(&mut rng);
            let g = ctx.random_elem(&mut rng);
            assert_eq!(ctx.class_id(&x), ctx.class_id(&ctx.conj(&g, &x)), "q={q}");
        }
    }
}

#[test]
fn class_sizes_sum_to_group_order() {
    for &q in SMALL_Q {
        let ctx = GroupCtx::new(q).unwrap();
        let total: u64 = ctx.all_class_ids().iter().map(|(_, s)| s).sum();
        assert_eq!(total, ctx.order(), "q={q}");
    }
}

#[test]
fn realize_contract_fuzz() {
    for &q in SMALL_Q {
        let ctx = GroupCtx::new(q).unwrap();
        let f = ctx.field();
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        for _ in 0..500 {
            let [a, b, c] = [0; 3].map(|_| f.from_enc(rng.random_range(0..q)).unwrap());
            let (ma, mb, mc) = realize_trace_triple(&ctx, a, b, c).unwrap();
            assert_eq!([ctx.trace(&ma), ctx.trace(&mb), ctx.trace(&mc)], [a, b, c]);
            assert!([ma, mb, mc].iter().all(|m| ctx.det(m) == f.one()));
            assert_eq!(ctx.mat_mul(&ctx.mat_mul(&ma, &mb), &mc), ctx.mat_identity());
        }
    }
}

#[test]
fn singular_iff_structural() {
    for q in [5u64, 7, 9, 11, 13] {
        let ctx = GroupCtx::new(q).unwrap();
        let f = ctx.field();
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        for _ in 0..200 {
            let [a, b, c] = [0; 3].map(|_| f.from_enc(rng.random_range(0..q)).unwrap());
            let (ma, mb, _) = realize_trace_triple(&ctx, a, b, c).unwrap();
            let kind = subgroup_kind(&ctx, &ctx.canon(&ma), &ctx.canon(&mb)).unwrap();
            assert_eq!(
                kind.tag == SubgroupTag::Structural,
                is_singular(f, a, b, c),
                "q={q} ({a},{b},{c}) {kind:?}"
            );
        }
    }
}

#[test]
fn unipotent_product_square_class_law() {
    for q in [5u64, 7, 9, 11, 13] {
        let ctx = GroupCtx::new(q).unwrap();
        let f = ctx.field();
        let two = ctx.two();
        let u1 = ctx.u1();
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        for _ in 0..500 {
            // tr(U1 M U1 M^-1) = 2 - c^2
            let m = ctx.random_sl2(&mut rng);
            let t = ctx.trace(&ctx.mat_mul(&u1, &ctx.mat_conj(&m, &u1)));
            assert_eq!(t, f.sub(two, f.square(m.c)));

            // trace-2 lifts X, Y: conjugate iff 2 - tr(XY) is a square
            let x = ctx.mat_conj(&ctx.random_sl2(&mut rng), &u1);
            let y = ctx.mat_conj(&ctx.random_sl2(&mut rng), &ctx.u1_prime());
            for (x, y) in [(x, y), (x, ctx.mat_conj(&m, &x))] {
                let gamma = ctx.trace(&ctx.mat_mul(&x, &y));
                if gamma == two {
                    continue;
                }
                let same = ctx.class_id(&ctx.canon(&x)) == ctx.class_id(&ctx.canon(&y));
                assert_eq!(same, f.is_square(f.sub(two, gamma)), "q={q}");
            }
        }
    }
}
