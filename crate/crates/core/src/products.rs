//! Trace triples, class squares and generation certificates.
//!
//! Every certificate produced here is checked by enumerating the subgroup it
//! generates; the trace arithmetic only selects candidates.

use std::collections::{BTreeSet, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{is_q_good, is_q_minimal, orders_table, trace_set};
use crate::error::{Error, Result};
use crate::ff::{Fe, FieldCtx, FiniteField};
use crate::psl2::{ClassId, ElemType, GroupCtx, Mat2, PElem};

/// Largest group the closure routines will enumerate.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

/// Randomized conjugations tried before a construction is declared defective.
pub const RETRY_BUDGET: usize = 64;

/// A union of classes, as in the right-hand sides of the class-square results.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetDescr {
    WholeGroup,
    AllMinusUnipotents,
    UnipotentsPlusGoodSs,
    UnipotentsPlusGoodSsPlusIdentity,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupTag {
    /// Inside a Borel subgroup or a cyclic torus.
    Structural,
    /// Dihedral, `A4`, `S4` or `A5`.
    Small,
    SubfieldPsl,
    SubfieldPgl,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct SubgroupKind {
    pub tag: SubgroupTag,
    pub order: u64,
    /// `q1` for subfield subgroups.
    pub subfield_q: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Two elements of one class generating the group.
    Pair,
    /// `x y z = 1`, all in one class, `<x, y>` the whole group.
    TripleProduct1,
    /// `x y` equals the target, `x` and `y` conjugate, generating the group.
    Factorization,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GenCertificate {
    pub elements: Vec<PElem>,
    pub relation: Relation,
    pub closure_order: u64,
    /// Only for [`Relation::Factorization`].
    pub target: Option<PElem>,
}

/// Factor type requested from [`product_of_conjugate_generators`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMode {
    Semisimple,
    Unipotent,
}

/// `alpha^2 + beta^2 + gamma^2 - alpha beta gamma - 4 = 0`.
pub fn is_singular(f: &FieldCtx, alpha: Fe, beta: Fe, gamma: Fe) -> bool {
    let s = f.add(f.add(f.square(alpha), f.square(beta)), f.square(gamma));
    let s = f.sub(s, f.mul(f.mul(alpha, beta), gamma));
    f.sub(s, f.from_int(4)) == f.zero()
}

/// Matrices `A, B, C` in `SL2(q)` with traces `alpha, beta, gamma` and `ABC = I`.
///
/// `A` is the companion matrix `[[alpha, -1], [1, 0]]`; `B = [[u, v], [w, beta - u]]`
/// is found by sweeping `u` in enc order and solving the quadratic in `w`
/// imposed by `det B = 1` and `tr(AB) = gamma`. `C = (AB)^{-1}`. A companion
/// matrix is never scalar, so when the sweep fails the cyclic rotations of the
/// triple are tried, then `A = +-I`.
pub fn realize_trace_triple(
    ctx: &GroupCtx,
    alpha: Fe,
    beta: Fe,
    gamma: Fe,
) -> Result<(Mat2, Mat2, Mat2)> {
    let f = ctx.field();
    let with_c = |(a, b): (Mat2, Mat2)| {
        let c = ctx.mat_inv(&ctx.mat_mul(&a, &b));
        (a, b, c)
    };
    let scalar = || {
        let s = [f.one(), f.neg(f.one())]
            .into_iter()
            .find(|&s| f.add(s, s) == alpha && f.mul(s, beta) == gamma)?;
        let a = ctx.mat_unchecked(s, f.zero(), f.zero(), s);
        Some(with_c((a, companion(ctx, beta))))
    };
    let triple = sweep(ctx, alpha, beta, gamma)
        .map(with_c)
        .or_else(|| {
            sweep(ctx, beta, gamma, alpha)
                .map(with_c)
                .map(|(a, b, c)| (c, a, b))
        })
        .or_else(|| {
            sweep(ctx, gamma, alpha, beta)
                .map(with_c)
                .map(|(a, b, c)| (b, c, a))
        })
        .or_else(scalar);
    let triple = match triple {
        Some(t) => t,
        None if ctx.q() <= 9 => {
            let a = companion(ctx, alpha);
            let b = exhaustive_second_factor(ctx, &a, beta, gamma).ok_or_else(|| {
                Error::Defect(format!("no trace triple ({alpha}, {beta}, {gamma})"))
            })?;
            with_c((a, b))
        }
        None => {
            return Err(Error::Defect(format!(
                "u-sweep found no trace triple ({alpha}, {beta}, {gamma})"
            )))
        }
    };
    check_triple(ctx, &triple, alpha, beta, gamma)?;
    Ok(triple)
}

fn companion(ctx: &GroupCtx, alpha: Fe) -> Mat2 {
    let f = ctx.field();
    ctx.mat_unchecked(alpha, f.neg(f.one()), f.one(), f.zero())
}

fn sweep(ctx: &GroupCtx, alpha: Fe, beta: Fe, gamma: Fe) -> Option<(Mat2, Mat2)> {
    let f = ctx.field();
    // v - w = gamma - alpha u and v w = u (beta - u) - 1, so
    // w^2 + (gamma - alpha u) w + (u^2 - beta u + 1) = 0
    f.elements().find_map(|u| {
        let shift = f.sub(gamma, f.mul(alpha, u));
        let c0 = f.add(f.sub(f.square(u), f.mul(beta, u)), f.one());
        let w = *f.solve_monic_quadratic(shift, c0).first()?;
        let v = f.add(w, shift);
        Some((
            companion(ctx, alpha),
            Mat2 {
                a: u,
                b: v,
                c: w,
                d: f.sub(beta, u),
            },
        ))
    })
}

fn exhaustive_second_factor(ctx: &GroupCtx, a: &Mat2, beta: Fe, gamma: Fe) -> Option<Mat2> {
    let f = ctx.field();
    for u in f.elements() {
        for v in f.elements() {
            for w in f.elements() {
                let b = Mat2 {
                    a: u,
                    b: v,
                    c: w,
                    d: f.sub(beta, u),
                };
                if ctx.det(&b) == f.one() && ctx.trace(&ctx.mat_mul(a, &b)) == gamma {
                    return Some(b);
                }
            }
        }
    }
    None
}

fn check_triple(
    ctx: &GroupCtx,
    (a, b, c): &(Mat2, Mat2, Mat2),
    alpha: Fe,
    beta: Fe,
    gamma: Fe,
) -> Result<()> {
    let one = ctx.field().one();
    let ok = ctx.trace(a) == alpha
        && ctx.trace(b) == beta
        && ctx.trace(c) == gamma
        && [a, b, c].iter().all(|m| ctx.det(m) == one)
        && ctx.mat_mul(&ctx.mat_mul(a, b), c) == ctx.mat_identity();
    if ok {
        Ok(())
    } else {
        Err(Error::Defect("trace triple violates its contract".into()))
    }
}

fn check_budget(ctx: &GroupCtx) -> Result<()> {
    if ctx.order() > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            order: ctx.order(),
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// Breadth-first closure of `gens` under multiplication. Stops once more than
/// `cap` elements are known and returns what was collected so far.
fn closure_capped(ctx: &GroupCtx, gens: &[PElem], cap: usize) -> Vec<PElem> {
    let id = ctx.identity();
    let mut seen: HashSet<PElem> = HashSet::from([id]);
    let mut order = vec![id];
    let mut head = 0;
    while head < order.len() {
        let h = order[head];
        head += 1;
        for g in gens {
            let hg = ctx.mul(&h, g);
            if seen.insert(hg) {
                order.push(hg);
                if order.len() > cap {
                    return order;
                }
            }
        }
    }
    order
}

/// All elements of `<gens>`.
pub fn generated_subgroup(ctx: &GroupCtx, gens: &[PElem]) -> Result<Vec<PElem>> {
    check_budget(ctx)?;
    Ok(closure_capped(ctx, gens, usize::MAX))
}

/// Whether `<gens>` is the whole group. A proper subgroup has at most half the
/// elements, so the search stops as soon as that bound is passed.
pub fn generates_group(ctx: &GroupCtx, gens: &[PElem]) -> Result<bool> {
    check_budget(ctx)?;
    let half = (ctx.order() / 2) as usize;
    Ok(closure_capped(ctx, gens, half).len() > half)
}

/// Whether every element of `gens` fixes a common point of `P^1(F_q)`.
fn common_fixed_point(ctx: &GroupCtx, gens: &[PElem]) -> bool {
    let f = ctx.field();
    let fixes = |m: &Mat2, v: (Fe, Fe)| {
        // det[Mv | v] = 0
        let mv0 = f.add(f.mul(m.a, v.0), f.mul(m.b, v.1));
        let mv1 = f.add(f.mul(m.c, v.0), f.mul(m.d, v.1));
        f.sub(f.mul(mv0, v.1), f.mul(mv1, v.0)) == f.zero()
    };
    let points = std::iter::once((f.zero(), f.one())).chain(f.elements().map(|t| (f.one(), t)));
    points
        .into_iter()
        .any(|v| gens.iter().all(|g| fixes(&g.rep(), v)))
}

/// Classifies `<x, y>` by enumerating it.
pub fn subgroup_kind(ctx: &GroupCtx, x: &PElem, y: &PElem) -> Result<SubgroupKind> {
    let elems = generated_subgroup(ctx, &[*x, *y])?;
    let h = elems.len() as u64;
    let kind = |tag, subfield_q| {
        Ok(SubgroupKind {
            tag,
            order: h,
            subfield_q,
        })
    };
    if h == ctx.order() {
        return kind(SubgroupTag::Full, None);
    }
    let orders: Vec<u64> = elems.iter().map(|e| ctx.order_of(e)).collect();
    let count = |n: u64| orders.iter().filter(|&&o| o == n).count() as u64;
    if orders.contains(&h) || common_fixed_point(ctx, &[*x, *y]) {
        return kind(SubgroupTag::Structural, None);
    }
    let dihedral = h.is_multiple_of(2) && orders.contains(&(h / 2)) && count(2) >= h / 2;
    let (p, e) = (ctx.p(), ctx.field().e());
    if !dihedral {
        for f in (1..e).filter(|f| e % f == 0) {
            let q1 = p.pow(f);
            let d1 = if p == 2 { 1 } else { 2 };
            if h == q1 * (q1 * q1 - 1) / d1 {
                return kind(SubgroupTag::SubfieldPsl, Some(q1));
            }
            if p != 2 && e % (2 * f) == 0 && h == q1 * (q1 * q1 - 1) {
                return kind(SubgroupTag::SubfieldPgl, Some(q1));
            }
        }
    }
    let small = dihedral
        || (h == 12 && count(2) == 3 && count(3) == 8)
        || (h == 24 && count(2) == 9 && count(3) == 8 && count(4) == 6)
        || (h == 60 && count(2) == 15 && count(3) == 20 && count(5) == 24);
    if small {
        return kind(SubgroupTag::Small, None);
    }
    Err(Error::UnclassifiedSubgroup(h))
}

fn require_large_q(ctx: &GroupCtx) -> Result<()> {
    if ctx.q() <= 3 {
        return Err(Error::UnsupportedQ {
            q: ctx.q(),
            need: "q > 3",
        });
    }
    Ok(())
}

fn require_nonidentity(ctx: &GroupCtx, id: &ClassId) -> Result<()> {
    if *id == ClassId::Identity {
        return Err(Error::IdentityClass);
    }
    if !ctx.is_realizable(id) {
        return Err(Error::UnrealizableClass(*id, ctx.q()));
    }
    Ok(())
}

/// Closed-form square of a non-identity class.
///
/// Even `q`: split and unipotent classes square to `G`, non-split classes to
/// `G` minus the unipotents. Odd `q`: semisimple classes of order `> 2` square
/// to `G`; the order-2 class gives `G` when `q = 1 mod 4` and `G` minus the
/// unipotents otherwise; unipotent classes give the unipotents and the
/// semisimple classes of q-good order, plus the identity when `q = 1 mod 4`.
pub fn class_square_closed(ctx: &GroupCtx, id: &ClassId) -> Result<SetDescr> {
    require_large_q(ctx)?;
    require_nonidentity(ctx, id)?;
    let q = ctx.q();
    let descr = if !ctx.is_odd() {
        match id {
            ClassId::Nonsplit(_) => SetDescr::AllMinusUnipotents,
            _ => SetDescr::WholeGroup,
        }
    } else if id.is_unipotent() {
        if q % 4 == 1 {
            SetDescr::UnipotentsPlusGoodSsPlusIdentity
        } else {
            SetDescr::UnipotentsPlusGoodSs
        }
    } else if ctx.class_order(id)? == 2 && q % 4 == 3 {
        SetDescr::AllMinusUnipotents
    } else {
        SetDescr::WholeGroup
    };
    Ok(descr)
}

pub fn expand_set_descr(ctx: &GroupCtx, s: SetDescr) -> Result<BTreeSet<ClassId>> {
    let q = ctx.q();
    let mut out = BTreeSet::new();
    for (id, _) in ctx.all_class_ids() {
        let keep = match s {
            SetDescr::WholeGroup => true,
            SetDescr::AllMinusUnipotents => !id.is_unipotent(),
            SetDescr::UnipotentsPlusGoodSs | SetDescr::UnipotentsPlusGoodSsPlusIdentity => match id
            {
                ClassId::Identity => s == SetDescr::UnipotentsPlusGoodSsPlusIdentity,
                ClassId::Unipotent(_) => true,
                _ => is_q_good(q, ctx.class_order(&id)?),
            },
        };
        if keep {
            out.insert(id);
        }
    }
    Ok(out)
}

/// Whether a class contains a generating pair: all non-identity classes except
/// those of order 2 and, for `q = 9`, the unipotent classes.
pub fn pair_expected(ctx: &GroupCtx, id: &ClassId) -> Result<bool> {
    require_large_q(ctx)?;
    require_nonidentity(ctx, id)?;
    Ok(ctx.class_order(id)? != 2 && !(ctx.q() == 9 && id.is_unipotent()))
}

/// Whether a class contains a generating triple with product 1: semisimple of
/// q-minimal order `> 3`, or unipotent with `q > 3` prime.
pub fn triple_expected(ctx: &GroupCtx, id: &ClassId) -> Result<bool> {
    require_large_q(ctx)?;
    require_nonidentity(ctx, id)?;
    let q = ctx.q();
    if id.is_unipotent() {
        return Ok(ctx.field().e() == 1);
    }
    let n = ctx.class_order(id)?;
    Ok(n > 3 && is_q_minimal(q, n)?)
}

fn certificate(
    ctx: &GroupCtx,
    elements: Vec<PElem>,
    relation: Relation,
    target: Option<PElem>,
) -> Result<Option<GenCertificate>> {
    let closure_order = if generates_group(ctx, &elements[..2])? {
        ctx.order()
    } else {
        0
    };
    if closure_order != ctx.order() {
        return Ok(None);
    }
    Ok(Some(GenCertificate {
        elements,
        relation,
        closure_order,
        target,
    }))
}

/// Re-validates a certificate: relation, shared class, and that the first two
/// elements generate the whole group.
pub fn validate_certificate(ctx: &GroupCtx, cert: &GenCertificate) -> Result<bool> {
    let els = &cert.elements;
    let class = |x: &PElem| ctx.class_id(x);
    let shape_ok = match cert.relation {
        Relation::Pair => els.len() == 2 && class(&els[0]) == class(&els[1]),
        Relation::TripleProduct1 => {
            els.len() == 3
                && els.iter().all(|x| class(x) == class(&els[0]))
                && ctx.is_identity(&ctx.mul(&ctx.mul(&els[0], &els[1]), &els[2]))
        }
        Relation::Factorization => {
            els.len() == 2
                && class(&els[0]) == class(&els[1])
                && cert.target == Some(ctx.mul(&els[0], &els[1]))
        }
    };
    if !shape_ok || cert.closure_order != ctx.order() {
        return Ok(false);
    }
    generates_group(ctx, &els[..2])
}

/// Candidate semisimple traces for the companion factor: first
/// `T_q((q+1)/d)`, then every other semisimple trace of order `> 2`.
fn semisimple_trace_candidates(ctx: &GroupCtx) -> Vec<Fe> {
    let primary = trace_set(ctx, (ctx.q() + 1) / ctx.d());
    let f = ctx.field();
    let rest = f.elements().filter(|t| {
        !primary.contains(t)
            && *t != f.zero()
            && matches!(ctx.trace_type(*t), ElemType::SplitSs | ElemType::NonsplitSs)
    });
    primary.iter().copied().chain(rest).collect()
}

fn random_conjugate_search<F>(
    ctx: &GroupCtx,
    seed: u64,
    mut attempt: F,
) -> Result<Option<GenCertificate>>
where
    F: FnMut(&PElem) -> Result<Option<GenCertificate>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_BUDGET {
        let g = ctx.random_elem(&mut rng);
        if let Some(cert) = attempt(&g)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// Two elements of class `id` generating `PSL2(q)`, when they exist.
pub fn generating_pair_in_class(
    ctx: &GroupCtx,
    id: &ClassId,
    seed: u64,
) -> Result<Option<GenCertificate>> {
    if !pair_expected(ctx, id)? {
        return Ok(None);
    }
    let f = ctx.field();
    let q = ctx.q();
    let in_class = |m: &Mat2| ctx.class_id(&ctx.canon(m)) == *id;
    let try_pair = |a: &Mat2, b: &Mat2| -> Result<Option<GenCertificate>> {
        let (a, b) = if in_class(a) {
            (*a, *b)
        } else {
            (ctx.x_conj(a), ctx.x_conj(b))
        };
        if !(in_class(&a) && in_class(&b)) {
            return Ok(None);
        }
        certificate(
            ctx,
            vec![ctx.canon(&a), ctx.canon(&b)],
            Relation::Pair,
            None,
        )
    };

    if let Some(alpha) = id.trace() {
        let gammas: Vec<Fe> = if q == 5 || q == 7 {
            vec![f.neg(ctx.two())]
        } else {
            trace_set(ctx, (q + 1) / ctx.d()).into_iter().collect()
        };
        for gamma in gammas.into_iter().chain(f.elements()) {
            if is_singular(f, alpha, alpha, gamma) {
                continue;
            }
            let (a, b, _) = realize_trace_triple(ctx, alpha, alpha, gamma)?;
            if let Some(cert) = try_pair(&a, &b)? {
                return Ok(Some(cert));
            }
        }
    } else {
        // conjugate unipotents whose product has q-minimal, q-good order
        let two = ctx.two();
        for t in orders_table(q)?.minimal_good {
            for gamma in trace_set(ctx, t) {
                if !f.is_square(f.sub(two, gamma)) {
                    continue;
                }
                let (a, b, _) = realize_trace_triple(ctx, two, two, gamma)?;
                if let Some(cert) = try_pair(&a, &b)? {
                    return Ok(Some(cert));
                }
            }
        }
    }

    let x = ctx.class_rep(id)?;
    random_conjugate_search(ctx, seed, |g| {
        certificate(ctx, vec![x, ctx.conj(g, &x)], Relation::Pair, None)
    })?
    .map(Some)
    .ok_or_else(|| {
        Error::Defect(format!(
            "no generating pair found in class {id} of PSL2({q})"
        ))
    })
}

/// The two matrices used for the unipotent triple over `F_p`:
/// `M = [[a+1, -a/2-1], [2, -1]]` and `K = [[a, -1/2], [2, 0]]`.
pub fn unipotent_triple_conjugators(ctx: &GroupCtx, a: Fe) -> (Mat2, Mat2) {
    let f = ctx.field();
    let half = f.inv(ctx.two()).expect("odd characteristic");
    let m = ctx.mat_unchecked(
        f.add(a, f.one()),
        f.neg(f.add(f.mul(a, half), f.one())),
        ctx.two(),
        f.neg(f.one()),
    );
    let k = ctx.mat_unchecked(a, f.neg(half), ctx.two(), f.zero());
    (m, k)
}

/// Three elements of class `id` with product 1, the first two generating.
pub fn generating_triple_in_class(
    ctx: &GroupCtx,
    id: &ClassId,
    seed: u64,
) -> Result<Option<GenCertificate>> {
    if !triple_expected(ctx, id)? {
        return Ok(None);
    }
    let f = ctx.field();
    let q = ctx.q();
    let in_class = |m: &Mat2| ctx.class_id(&ctx.canon(m)) == *id;
    let try_triple = |ms: [Mat2; 3]| -> Result<Option<GenCertificate>> {
        let ms = if in_class(&ms[0]) {
            ms
        } else {
            ms.map(|m| ctx.x_conj(&m))
        };
        if !ms.iter().all(in_class) {
            return Ok(None);
        }
        let els: Vec<PElem> = ms.iter().map(|m| ctx.canon(m)).collect();
        certificate(ctx, els, Relation::TripleProduct1, None)
    };

    if let Some(alpha) = id.trace() {
        let mut thirds = vec![alpha];
        if ctx.is_odd() {
            thirds.push(f.neg(alpha));
        }
        for gamma in thirds {
            let (a, b, c) = realize_trace_triple(ctx, alpha, alpha, gamma)?;
            if let Some(cert) = try_triple([a, b, c])? {
                return Ok(Some(cert));
            }
        }
    } else {
        let two = ctx.two();
        let u = ctx.u_minus1();
        for a in f
            .elements()
            .filter(|&a| a != f.zero() && a != two && a != f.neg(two))
        {
            let (m, k) = unipotent_triple_conjugators(ctx, a);
            let triple = [u, ctx.mat_conj(&m, &u), ctx.mat_conj(&k, &u)];
            if ctx.mat_mul(&ctx.mat_mul(&triple[0], &triple[1]), &triple[2]) != ctx.mat_identity() {
                return Err(Error::Defect(format!(
                    "unipotent triple product is not I for a = {a}"
                )));
            }
            if let Some(cert) = try_triple(triple)? {
                return Ok(Some(cert));
            }
        }
    }

    let x = ctx.class_rep(id)?;
    random_conjugate_search(ctx, seed, |g| {
        let y = ctx.conj(g, &x);
        let z = ctx.inv(&ctx.mul(&x, &y));
        if ctx.class_id(&z) != *id {
            return Ok(None);
        }
        certificate(ctx, vec![x, y, z], Relation::TripleProduct1, None)
    })?
    .map(Some)
    .ok_or_else(|| {
        Error::Defect(format!(
            "no generating triple found in class {id} of PSL2({q})"
        ))
    })
}

/// Whether `z` is a product of two conjugate generators of the requested type.
///
/// Semisimple factors: only semisimple `z` for even `q`; every non-trivial `z`
/// for odd `q` except the elements of order 2 or 3 in `PSL2(5)`, the
/// involutions of `PSL2(7)` and the unipotents of `PSL2(9)`. Unipotent factors:
/// odd `q != 9` with `z` semisimple of q-minimal, q-good order, or `z`
/// unipotent with `q` prime.
pub fn factorization_expected(ctx: &GroupCtx, z: &PElem, mode: FactorMode) -> Result<bool> {
    require_large_q(ctx)?;
    if ctx.is_identity(z) {
        return Err(Error::IdentityElement);
    }
    let q = ctx.q();
    let ty = ctx.elem_type(z);
    Ok(match mode {
        FactorMode::Semisimple if !ctx.is_odd() => ty != ElemType::Unipotent,
        FactorMode::Semisimple => match (q, ctx.order_of(z)) {
            (5, 2 | 3) | (7, 2) => false,
            (9, _) => ty != ElemType::Unipotent,
            _ => true,
        },
        FactorMode::Unipotent if !ctx.is_odd() || q == 9 => false,
        FactorMode::Unipotent if ty == ElemType::Unipotent => ctx.field().e() == 1,
        FactorMode::Unipotent => {
            let n = ctx.order_of(z);
            is_q_minimal(q, n)? && is_q_good(q, n)
        }
    })
}

/// Writes `z = x y` with `x`, `y` conjugate generators of `PSL2(q)`.
pub fn product_of_conjugate_generators(
    ctx: &GroupCtx,
    z: &PElem,
    mode: FactorMode,
    seed: u64,
) -> Result<Option<GenCertificate>> {
    if !factorization_expected(ctx, z, mode)? {
        return Ok(None);
    }
    let f = ctx.field();
    let q = ctx.q();
    let target_class = ctx.class_id(z);
    let two = ctx.two();
    let factor_ok = |m: &Mat2| match mode {
        FactorMode::Semisimple => matches!(
            ctx.elem_type(&ctx.canon(m)),
            ElemType::SplitSs | ElemType::NonsplitSs
        ),
        FactorMode::Unipotent => ctx.elem_type(&ctx.canon(m)) == ElemType::Unipotent,
    };
    // (A, B) with ABC = I: move A B onto z by a conjugator, optionally after the
    // X-twist that swaps the unipotent classes.
    let try_factors = |a: &Mat2, b: &Mat2| -> Result<Option<GenCertificate>> {
        if !factor_ok(a) {
            return Ok(None);
        }
        for (a, b) in [(*a, *b), (ctx.x_conj(a), ctx.x_conj(b))] {
            let w = ctx.canon(&ctx.mat_mul(&a, &b));
            if ctx.class_id(&w) != target_class {
                continue;
            }
            let g = ctx
                .conjugator(&w, z)
                .ok_or_else(|| Error::Defect("no conjugator within a class".into()))?;
            let x = ctx.conj(&g, &ctx.canon(&a));
            let y = ctx.conj(&g, &ctx.canon(&b));
            if ctx.class_id(&x) != ctx.class_id(&y) {
                continue;
            }
            debug_assert_eq!(ctx.mul(&x, &y), *z);
            return certificate(ctx, vec![x, y], Relation::Factorization, Some(*z));
        }
        Ok(None)
    };

    let gamma = ctx.trace_of(z);
    let gammas = if ctx.is_odd() {
        vec![gamma, f.neg(gamma)]
    } else {
        vec![gamma]
    };
    match mode {
        FactorMode::Semisimple => {
            for alpha in semisimple_trace_candidates(ctx) {
                for &g in &gammas {
                    if is_singular(f, alpha, alpha, g) {
                        continue;
                    }
                    let (a, b, _) = realize_trace_triple(ctx, alpha, alpha, g)?;
                    if let Some(cert) = try_factors(&a, &b)? {
                        return Ok(Some(cert));
                    }
                }
            }
        }
        FactorMode::Unipotent if ctx.elem_type(z) == ElemType::Unipotent => {
            let u = ctx.u_minus1();
            for a in f
                .elements()
                .filter(|&a| a != f.zero() && a != two && a != f.neg(two))
            {
                let (m, _) = unipotent_triple_conjugators(ctx, a);
                if let Some(cert) = try_factors(&u, &ctx.mat_conj(&m, &u))? {
                    return Ok(Some(cert));
                }
            }
        }
        FactorMode::Unipotent => {
            for &g in &gammas {
                if !f.is_square(f.sub(two, g)) {
                    continue;
                }
                let (a, b, _) = realize_trace_triple(ctx, two, two, g)?;
                if let Some(cert) = try_factors(&a, &b)? {
                    return Ok(Some(cert));
                }
            }
        }
    }

    // random x in a suitable class with y = x^{-1} z
    let reps: Vec<PElem> = ctx
        .all_class_ids()
        .into_iter()
        .filter(|(id, _)| match mode {
            FactorMode::Semisimple => id.is_semisimple(),
            FactorMode::Unipotent => id.is_unipotent(),
        })
        .map(|(id, _)| ctx.class_rep(&id).expect("enumerated"))
        .collect();
    random_conjugate_search(ctx, seed, |g| {
        for r in &reps {
            let x = ctx.conj(g, r);
            let y = ctx.mul(&ctx.inv(&x), z);
            if ctx.class_id(&y) == ctx.class_id(&x) {
                if let Some(cert) = certificate(ctx, vec![x, y], Relation::Factorization, Some(*z))?
                {
                    return Ok(Some(cert));
                }
            }
        }
        Ok(None)
    })?
    .map(Some)
    .ok_or_else(|| {
        Error::Defect(format!(
            "no factorization found for {:?} in PSL2({q})",
            z.rep().enc4()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psl2::SquareClass;

    fn g(q: u64) -> GroupCtx {
        GroupCtx::new(q).unwrap()
    }

    #[test]
    fn singular_examples() {
        let ctx = g(7);
        let f = ctx.field();
        let two = ctx.two();
        assert!(is_singular(f, f.zero(), f.zero(), two));
        assert!(is_singular(f, f.zero(), f.zero(), f.neg(two)));
        for gamma in f.elements() {
            // (2, 2, gamma) evaluates to (gamma - 2)^2
            assert_eq!(is_singular(f, two, two, gamma), gamma == two);
            for alpha in f.elements() {
                let lhs = is_singular(f, alpha, alpha, gamma);
                let factored = f.mul(f.sub(two, gamma), f.sub(f.sub(f.square(alpha), gamma), two));
                assert_eq!(lhs, factored == f.zero());
            }
        }
    }

    #[test]
    fn realize_examples() {
        let c7 = g(7);
        let f = c7.field();
        let (_, _, c) = realize_trace_triple(&c7, f.zero(), f.zero(), f.from_int(3)).unwrap();
        assert_eq!(c7.trace(&c), f.from_int(3));
        let c5 = g(5);
        let f5 = c5.field();
        realize_trace_triple(&c5, f5.one(), f5.one(), f5.neg(f5.one())).unwrap();
        let two = c7.two();
        realize_trace_triple(&c7, two, two, two).unwrap();
    }

    #[test]
    fn unipotent_triple_product_is_identity() {
        for q in [5, 7, 11, 13, 17] {
            let ctx = g(q);
            let f = ctx.field();
            let u = ctx.u_minus1();
            for a in f.elements() {
                let (m, k) = unipotent_triple_conjugators(&ctx, a);
                assert_eq!(ctx.det(&m), f.one());
                assert_eq!(ctx.det(&k), f.one());
                let prod = ctx.mat_mul(
                    &ctx.mat_mul(&u, &ctx.mat_conj(&m, &u)),
                    &ctx.mat_conj(&k, &u),
                );
                assert_eq!(prod, ctx.mat_identity(), "q={q} a={a}");
            }
        }
    }

    #[test]
    fn subgroup_kind_examples() {
        let c7 = g(7);
        let x = c7.class_rep(&ClassId::Split(c7.field().one())).unwrap();
        assert_eq!(
            subgroup_kind(&c7, &x, &x).unwrap().tag,
            SubgroupTag::Structural
        );
        let f = c7.field();
        let (a, b, _) = realize_trace_triple(&c7, f.zero(), f.zero(), c7.two()).unwrap();
        assert_eq!(
            subgroup_kind(&c7, &c7.canon(&a), &c7.canon(&b))
                .unwrap()
                .tag,
            SubgroupTag::Structural
        );
        let c5 = g(5);
        let u = c5.u_minus1();
        let (m, _) = unipotent_triple_conjugators(&c5, c5.field().one());
        let k = subgroup_kind(&c5, &c5.canon(&u), &c5.canon(&c5.mat_conj(&m, &u))).unwrap();
        assert_eq!((k.tag, k.order), (SubgroupTag::Full, 60));
    }

    #[test]
    fn closed_form_examples() {
        let c8 = g(8);
        let split = c8
            .all_class_ids()
            .into_iter()
            .find(|(id, _)| matches!(id, ClassId::Split(_)))
            .unwrap()
            .0;
        assert_eq!(
            class_square_closed(&c8, &split).unwrap(),
            SetDescr::WholeGroup
        );
        let c7 = g(7);
        assert_eq!(
            class_square_closed(&c7, &ClassId::Nonsplit(c7.field().zero())).unwrap(),
            SetDescr::AllMinusUnipotents
        );
        let c13 = g(13);
        assert_eq!(
            class_square_closed(&c13, &ClassId::Unipotent(SquareClass::Square)).unwrap(),
            SetDescr::UnipotentsPlusGoodSsPlusIdentity
        );
        assert!(matches!(
            class_square_closed(&c7, &ClassId::Identity),
            Err(Error::IdentityClass)
        ));
        assert!(matches!(
            class_square_closed(&g(3), &ClassId::Unipotent(SquareClass::Square)),
            Err(Error::UnsupportedQ { .. })
        ));
    }

    #[test]
    fn expand_examples() {
        let total = |ctx: &GroupCtx, s| -> u64 {
            expand_set_descr(ctx, s)
                .unwrap()
                .iter()
                .map(|id| ctx.class_size(id).unwrap())
                .sum()
        };
        let c7 = g(7);
        assert_eq!(total(&c7, SetDescr::UnipotentsPlusGoodSs), 125);
        let c5 = g(5);
        assert_eq!(total(&c5, SetDescr::UnipotentsPlusGoodSsPlusIdentity), 45);
        for q in [4, 7, 9] {
            let ctx = g(q);
            assert_eq!(total(&ctx, SetDescr::WholeGroup), ctx.order());
        }
    }

    #[test]
    fn generation_examples() {
        let c9 = g(9);
        assert!(
            generating_pair_in_class(&c9, &ClassId::Unipotent(SquareClass::Square), 0)
                .unwrap()
                .is_none()
        );
        let c7 = g(7);
        assert!(
            generating_pair_in_class(&c7, &ClassId::Nonsplit(c7.field().zero()), 0)
                .unwrap()
                .is_none()
        );
        let ord3 = ClassId::Split(c7.field().one());
        let cert = generating_pair_in_class(&c7, &ord3, 0).unwrap().unwrap();
        assert_eq!(cert.closure_order, 168);
        assert!(validate_certificate(&c7, &cert).unwrap());
        let t = generating_triple_in_class(&c7, &ClassId::Unipotent(SquareClass::Square), 0)
            .unwrap()
            .unwrap();
        assert!(validate_certificate(&c7, &t).unwrap());
    }

    #[test]
    fn factorization_examples() {
        let c8 = g(8);
        let u = c8.canon(&c8.u1());
        assert!(
            product_of_conjugate_generators(&c8, &u, FactorMode::Semisimple, 0)
                .unwrap()
                .is_none()
        );
        let c7 = g(7);
        let z = c7.class_rep(&ClassId::Split(c7.field().one())).unwrap();
        let cert = product_of_conjugate_generators(&c7, &z, FactorMode::Unipotent, 0)
            .unwrap()
            .unwrap();
        assert!(validate_certificate(&c7, &cert).unwrap());
        let c9 = g(9);
        for (id, _) in c9.all_class_ids().into_iter().skip(1) {
            let z = c9.class_rep(&id).unwrap();
            assert!(
                product_of_conjugate_generators(&c9, &z, FactorMode::Unipotent, 0)
                    .unwrap()
                    .is_none()
            );
        }
    }
}
