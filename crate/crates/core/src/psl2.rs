//! `SL2(q)` matrix arithmetic and `PSL2(q)` elements, orders and conjugacy classes.

use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::{make_field, quad_ext, Fe, FieldCtx, FiniteField, QuadExt};
use crate::numtheory::{divisors, prime_power};

/// A 2x2 matrix over `F_q`, row-major. Built through [`GroupCtx::mat`], which
/// enforces `det = 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Mat2 {
    pub a: Fe,
    pub b: Fe,
    pub c: Fe,
    pub d: Fe,
}

impl Mat2 {
    pub fn entries(&self) -> [Fe; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn enc4(&self) -> [u32; 4] {
        [self.a.enc(), self.b.enc(), self.c.enc(), self.d.enc()]
    }
}

/// An element of `PSL2(q)`: the enc-lexicographically smaller of the lifts
/// `A` and `-A` (for even `q` the unique lift).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PElem(Mat2);

impl PElem {
    pub fn rep(&self) -> Mat2 {
        self.0
    }
}

impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.enc4().serialize(s)
    }
}

impl Serialize for PElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElemType {
    Identity,
    Unipotent,
    SplitSs,
    NonsplitSs,
}

/// Square class of `det[Nv | v]` for a trace-2 lift `I + N`. `U1` is `Square`,
/// `U'1` is `Nonsquare`. Always `Square` for even `q`, where there is one
/// unipotent class.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SquareClass {
    Square,
    Nonsquare,
}

/// A conjugacy class of `PSL2(q)`.
///
/// Semisimple classes carry the enc-smaller member of the trace orbit
/// `{alpha, -alpha}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ClassId {
    Identity,
    Unipotent(SquareClass),
    Split(Fe),
    Nonsplit(Fe),
}

impl ClassId {
    pub fn kind(&self) -> ElemType {
        match self {
            ClassId::Identity => ElemType::Identity,
            ClassId::Unipotent(_) => ElemType::Unipotent,
            ClassId::Split(_) => ElemType::SplitSs,
            ClassId::Nonsplit(_) => ElemType::NonsplitSs,
        }
    }

    pub fn is_unipotent(&self) -> bool {
        matches!(self, ClassId::Unipotent(_))
    }

    pub fn is_semisimple(&self) -> bool {
        matches!(self, ClassId::Split(_) | ClassId::Nonsplit(_))
    }

    pub fn trace(&self) -> Option<Fe> {
        match *self {
            ClassId::Split(t) | ClassId::Nonsplit(t) => Some(t),
            _ => None,
        }
    }
}

/// Selector form: `id`, `unip:sq`, `unip:nonsq`, `tr:<enc>`.
impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassId::Identity => write!(f, "id"),
            ClassId::Unipotent(SquareClass::Square) => write!(f, "unip:sq"),
            ClassId::Unipotent(SquareClass::Nonsquare) => write!(f, "unip:nonsq"),
            ClassId::Split(t) | ClassId::Nonsplit(t) => write!(f, "tr:{}", t.enc()),
        }
    }
}

impl Serialize for ClassId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `PSL2(q)` together with its field and the quadratic extension.
#[derive(Clone, Debug)]
pub struct GroupCtx {
    field: FieldCtx,
    ext: QuadExt,
    d: u64,
    order: u64,
}

pub fn group_ctx(field: FieldCtx) -> GroupCtx {
    let q = field.q();
    let d = if field.is_odd() { 2 } else { 1 };
    GroupCtx {
        ext: quad_ext(&field),
        field,
        d,
        order: q * (q * q - 1) / d,
    }
}

impl GroupCtx {
    /// `PSL2(q)` for a prime power `q`.
    pub fn new(q: u64) -> Result<GroupCtx> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Ok(group_ctx(make_field(p, e)?))
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn ext(&self) -> &QuadExt {
        &self.ext
    }

    pub fn q(&self) -> u64 {
        self.field.q()
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    /// `gcd(2, q - 1)`.
    pub fn d(&self) -> u64 {
        self.d
    }

    /// `q(q^2 - 1)/d`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_odd(&self) -> bool {
        self.field.is_odd()
    }

    pub fn two(&self) -> Fe {
        self.field.from_int(2)
    }

    pub fn mat(&self, a: Fe, b: Fe, c: Fe, d: Fe) -> Result<Mat2> {
        if ![a, b, c, d].iter().all(|&x| self.field.contains(x)) {
            return Err(Error::ForeignElement);
        }
        let m = Mat2 { a, b, c, d };
        if self.det(&m) != self.field.one() {
            return Err(Error::NotUnimodular);
        }
        Ok(m)
    }

    pub fn mat_from_enc(&self, enc: [u64; 4]) -> Result<Mat2> {
        let f = &self.field;
        let get = |k: u64| f.from_enc(k).ok_or(Error::ForeignElement);
        self.mat(get(enc[0])?, get(enc[1])?, get(enc[2])?, get(enc[3])?)
    }

    pub(crate) fn mat_unchecked(&self, a: Fe, b: Fe, c: Fe, d: Fe) -> Mat2 {
        let m = Mat2 { a, b, c, d };
        debug_assert_eq!(self.det(&m), self.field.one());
        m
    }

    pub fn det(&self, m: &Mat2) -> Fe {
        let f = &self.field;
        f.sub(f.mul(m.a, m.d), f.mul(m.b, m.c))
    }

    pub fn trace(&self, m: &Mat2) -> Fe {
        self.field.add(m.a, m.d)
    }

    pub fn mat_identity(&self) -> Mat2 {
        let f = &self.field;
        Mat2 {
            a: f.one(),
            b: f.zero(),
            c: f.zero(),
            d: f.one(),
        }
    }

    pub fn mat_mul(&self, x: &Mat2, y: &Mat2) -> Mat2 {
        let f = &self.field;
        Mat2 {
            a: f.add(f.mul(x.a, y.a), f.mul(x.b, y.c)),
            b: f.add(f.mul(x.a, y.b), f.mul(x.b, y.d)),
            c: f.add(f.mul(x.c, y.a), f.mul(x.d, y.c)),
            d: f.add(f.mul(x.c, y.b), f.mul(x.d, y.d)),
        }
    }

    /// Adjugate, which is the inverse for unimodular matrices.
    pub fn mat_inv(&self, m: &Mat2) -> Mat2 {
        let f = &self.field;
        Mat2 {
            a: m.d,
            b: f.neg(m.b),
            c: f.neg(m.c),
            d: m.a,
        }
    }

    pub fn mat_neg(&self, m: &Mat2) -> Mat2 {
        let f = &self.field;
        Mat2 {
            a: f.neg(m.a),
            b: f.neg(m.b),
            c: f.neg(m.c),
            d: f.neg(m.d),
        }
    }

    pub fn mat_pow(&self, m: &Mat2, mut k: u64) -> Mat2 {
        let mut base = *m;
        let mut acc = self.mat_identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mat_mul(&acc, &base);
            }
            base = self.mat_mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// `g m g^{-1}`.
    pub fn mat_conj(&self, g: &Mat2, m: &Mat2) -> Mat2 {
        self.mat_mul(&self.mat_mul(g, m), &self.mat_inv(g))
    }

    pub fn is_scalar(&self, m: &Mat2) -> bool {
        m.b == self.field.zero() && m.c == self.field.zero() && m.a == m.d
    }

    /// Canonical coset representative of `{A, -A}`.
    pub fn canon(&self, m: &Mat2) -> PElem {
        if self.is_odd() {
            PElem((*m).min(self.mat_neg(m)))
        } else {
            PElem(*m)
        }
    }

    /// Validating constructor.
    pub fn elem(&self, m: &Mat2) -> Result<PElem> {
        let m = self.mat(m.a, m.b, m.c, m.d)?;
        Ok(self.canon(&m))
    }

    pub fn elem_from_enc(&self, enc: [u64; 4]) -> Result<PElem> {
        Ok(self.canon(&self.mat_from_enc(enc)?))
    }

    pub fn identity(&self) -> PElem {
        self.canon(&self.mat_identity())
    }

    pub fn is_identity(&self, x: &PElem) -> bool {
        self.is_scalar(&x.0)
    }

    pub fn mul(&self, x: &PElem, y: &PElem) -> PElem {
        debug_assert!(x
            .0
            .entries()
            .iter()
            .chain(&y.0.entries())
            .all(|&e| self.field.contains(e)));
        self.canon(&self.mat_mul(&x.0, &y.0))
    }

    pub fn inv(&self, x: &PElem) -> PElem {
        self.canon(&self.mat_inv(&x.0))
    }

    pub fn pow(&self, x: &PElem, k: u64) -> PElem {
        self.canon(&self.mat_pow(&x.0, k))
    }

    /// `g x g^{-1}`.
    pub fn conj(&self, g: &PElem, x: &PElem) -> PElem {
        self.canon(&self.mat_conj(&g.0, &x.0))
    }

    /// Trace of the canonical lift. For odd `q` only `{t, -t}` is well defined.
    pub fn trace_of(&self, x: &PElem) -> Fe {
        self.trace(&x.0)
    }

    /// Candidate element orders: divisors of `p`, `(q-1)/d` and `(q+1)/d`.
    pub fn order_candidates(&self) -> Vec<u64> {
        let q = self.q();
        let mut c: Vec<u64> = divisors(self.p())
            .into_iter()
            .chain(divisors((q - 1) / self.d))
            .chain(divisors((q + 1) / self.d))
            .collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Least `n >= 1` with `x^n = 1`.
    pub fn order_of(&self, x: &PElem) -> u64 {
        self.order_candidates()
            .into_iter()
            .find(|&n| self.is_scalar(&self.mat_pow(&x.0, n)))
            .expect("every element order divides p, (q-1)/d or (q+1)/d")
    }

    /// Trace type: unipotent for `±2`, split when `lambda^2 - alpha lambda + 1`
    /// has two roots in `F_q`, non-split when it has none.
    pub fn trace_type(&self, alpha: Fe) -> ElemType {
        let f = &self.field;
        let two = self.two();
        if alpha == two || alpha == f.neg(two) {
            return ElemType::Unipotent;
        }
        if f.solve_monic_quadratic(f.neg(alpha), f.one()).len() == 2 {
            ElemType::SplitSs
        } else {
            ElemType::NonsplitSs
        }
    }

    pub fn elem_type(&self, x: &PElem) -> ElemType {
        if self.is_identity(x) {
            return ElemType::Identity;
        }
        self.trace_type(self.trace_of(x))
    }

    fn trace_orbit(&self, alpha: Fe) -> Fe {
        alpha.min(self.field.neg(alpha))
    }

    /// Square class of a non-identity element with trace `±2`.
    fn unipotent_square_class(&self, m: &Mat2) -> SquareClass {
        if !self.is_odd() {
            return SquareClass::Square;
        }
        let f = &self.field;
        let mut a = *m;
        if self.trace(&a) != self.two() {
            a = self.mat_neg(&a);
        }
        // N = A - I, nilpotent and nonzero
        let n = [f.sub(a.a, f.one()), a.b, a.c, f.sub(a.d, f.one())];
        // v = e2 gives Nv = (n01, n11) and det[Nv | v] = n01;
        // v = e1 gives Nv = (n00, n10) and det[Nv | v] = -n10
        let value = if n[1] != f.zero() || n[3] != f.zero() {
            n[1]
        } else {
            f.neg(n[2])
        };
        debug_assert!(value != f.zero());
        if f.is_square(value) {
            SquareClass::Square
        } else {
            SquareClass::Nonsquare
        }
    }

    pub fn class_id(&self, x: &PElem) -> ClassId {
        match self.elem_type(x) {
            ElemType::Identity => ClassId::Identity,
            ElemType::Unipotent => ClassId::Unipotent(self.unipotent_square_class(&x.0)),
            ElemType::SplitSs => ClassId::Split(self.trace_orbit(self.trace_of(x))),
            ElemType::NonsplitSs => ClassId::Nonsplit(self.trace_orbit(self.trace_of(x))),
        }
    }

    /// Whether `id` labels a class of this group.
    pub fn is_realizable(&self, id: &ClassId) -> bool {
        match *id {
            ClassId::Identity | ClassId::Unipotent(SquareClass::Square) => true,
            ClassId::Unipotent(SquareClass::Nonsquare) => self.is_odd(),
            ClassId::Split(t) => {
                self.field.contains(t)
                    && self.trace_orbit(t) == t
                    && self.trace_type(t) == ElemType::SplitSs
            }
            ClassId::Nonsplit(t) => {
                self.field.contains(t)
                    && self.trace_orbit(t) == t
                    && self.trace_type(t) == ElemType::NonsplitSs
            }
        }
    }

    fn check(&self, id: &ClassId) -> Result<()> {
        if self.is_realizable(id) {
            Ok(())
        } else {
            Err(Error::UnrealizableClass(*id, self.q()))
        }
    }

    /// Class sizes: `(q^2-1)/d` for unipotents, `q(q+1)/kappa` split,
    /// `q(q-1)/kappa` non-split, with `kappa = 2` exactly at trace 0.
    pub fn class_size(&self, id: &ClassId) -> Result<u64> {
        self.check(id)?;
        let q = self.q();
        let kappa = |t: Fe| if t == self.field.zero() { 2 } else { 1 };
        Ok(match *id {
            ClassId::Identity => 1,
            ClassId::Unipotent(_) => (q * q - 1) / self.d,
            ClassId::Split(t) => q * (q + 1) / kappa(t),
            ClassId::Nonsplit(t) => q * (q - 1) / kappa(t),
        })
    }

    /// Every class exactly once, with its size. Identity first, then the
    /// unipotent classes, then semisimple classes by trace encoding.
    pub fn all_class_ids(&self) -> Vec<(ClassId, u64)> {
        let mut ids = vec![ClassId::Identity, ClassId::Unipotent(SquareClass::Square)];
        if self.is_odd() {
            ids.push(ClassId::Unipotent(SquareClass::Nonsquare));
        }
        for t in self.field.elements() {
            if self.trace_orbit(t) != t {
                continue;
            }
            match self.trace_type(t) {
                ElemType::SplitSs => ids.push(ClassId::Split(t)),
                ElemType::NonsplitSs => ids.push(ClassId::Nonsplit(t)),
                _ => {}
            }
        }
        ids.into_iter()
            .map(|id| {
                let size = self
                    .class_size(&id)
                    .expect("enumerated classes are realizable");
                (id, size)
            })
            .collect()
    }

    /// `U1 = [[1,1],[0,1]]`.
    pub fn u1(&self) -> Mat2 {
        let f = &self.field;
        Mat2 {
            a: f.one(),
            b: f.one(),
            c: f.zero(),
            d: f.one(),
        }
    }

    /// `U_{-1} = [[-1,1],[0,-1]] = -U1^{-1}`.
    pub fn u_minus1(&self) -> Mat2 {
        let f = &self.field;
        let m1 = f.neg(f.one());
        Mat2 {
            a: m1,
            b: f.one(),
            c: f.zero(),
            d: m1,
        }
    }

    /// Conjugation by `X = diag(x, 1/x)` with `x^2 = nu` the canonical
    /// non-square: `[[a, b nu], [c / nu, d]]`. Maps `SL2(q)` to itself and swaps
    /// the two unipotent classes. Identity map for even `q`.
    pub fn x_conj(&self, m: &Mat2) -> Mat2 {
        let f = &self.field;
        match f.nonsquare() {
            Some(nu) => Mat2 {
                a: m.a,
                b: f.mul(m.b, nu),
                c: f.div(m.c, nu).expect("nu nonzero"),
                d: m.d,
            },
            None => *m,
        }
    }

    /// `U'1 = X U1 X^{-1}`.
    pub fn u1_prime(&self) -> Mat2 {
        self.x_conj(&self.u1())
    }

    /// `U'_{-1} = X U_{-1} X^{-1}`.
    pub fn u_minus1_prime(&self) -> Mat2 {
        self.x_conj(&self.u_minus1())
    }

    /// A fixed representative: `I`, `U1`, `U'1`, or the companion matrix
    /// `[[alpha, -1], [1, 0]]` of the class trace.
    pub fn class_rep(&self, id: &ClassId) -> Result<PElem> {
        self.check(id)?;
        let f = &self.field;
        let m = match *id {
            ClassId::Identity => self.mat_identity(),
            ClassId::Unipotent(SquareClass::Square) => self.u1(),
            ClassId::Unipotent(SquareClass::Nonsquare) => self.u1_prime(),
            ClassId::Split(t) | ClassId::Nonsplit(t) => {
                self.mat_unchecked(t, f.neg(f.one()), f.one(), f.zero())
            }
        };
        Ok(self.canon(&m))
    }

    /// Order of the elements in a class.
    pub fn class_order(&self, id: &ClassId) -> Result<u64> {
        Ok(self.order_of(&self.class_rep(id)?))
    }

    /// A uniform random element of `SL2(q)`.
    pub fn random_sl2<R: Rng + ?Sized>(&self, rng: &mut R) -> Mat2 {
        let f = &self.field;
        let q = self.q();
        loop {
            let a = Fe(rng.random_range(0..q) as u32);
            let b = Fe(rng.random_range(0..q) as u32);
            if a == f.zero() && b == f.zero() {
                continue;
            }
            let t = Fe(rng.random_range(0..q) as u32);
            // second row (c, d) with a d - b c = 1
            let (c, d) = if a != f.zero() {
                let d = f.div(f.add(f.one(), f.mul(b, t)), a).expect("a nonzero");
                (t, d)
            } else {
                (f.neg(f.inv(b).expect("b nonzero")), t)
            };
            return self.mat_unchecked(a, b, c, d);
        }
    }

    pub fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> PElem {
        self.canon(&self.random_sl2(rng))
    }

    /// Some `g` in `SL2(q)` with `g m g^{-1} = n`, if one exists.
    pub fn sl2_conjugator(&self, m: &Mat2, n: &Mat2) -> Option<Mat2> {
        let f = &self.field;
        if self.is_scalar(m) || self.is_scalar(n) {
            return (m == n).then(|| self.mat_identity());
        }
        if self.trace(m) != self.trace(n) {
            return None;
        }
        // g m = n g as a homogeneous linear system in (g11, g12, g21, g22)
        let z = f.zero();
        let rows = [
            [f.sub(m.a, n.a), m.c, f.neg(n.b), z],
            [m.b, f.sub(m.d, n.a), z, f.neg(n.b)],
            [f.neg(n.c), z, f.sub(m.a, n.d), m.c],
            [z, f.neg(n.c), m.b, f.sub(m.d, n.d)],
        ];
        let basis = nullspace(f, rows);
        let candidates: Vec<[Fe; 4]> = match basis.as_slice() {
            [] => return None,
            [g] => vec![*g],
            [g0, g1] => std::iter::once(*g1)
                .chain(f.elements().map(|t| {
                    let mut v = *g0;
                    for i in 0..4 {
                        v[i] = f.add(v[i], f.mul(t, g1[i]));
                    }
                    v
                }))
                .collect(),
            _ => unreachable!("centralizer of a non-scalar matrix is 2-dimensional"),
        };
        for v in candidates {
            let g = Mat2 {
                a: v[0],
                b: v[1],
                c: v[2],
                d: v[3],
            };
            let det = self.det(&g);
            if det == z {
                continue;
            }
            if let Some(s) = f.sqrt(det) {
                let si = f.inv(s).expect("nonzero");
                let g = Mat2 {
                    a: f.mul(g.a, si),
                    b: f.mul(g.b, si),
                    c: f.mul(g.c, si),
                    d: f.mul(g.d, si),
                };
                debug_assert_eq!(self.mat_conj(&g, m), *n);
                return Some(g);
            }
        }
        None
    }

    /// Some `g` with `g x g^{-1} = y` in `PSL2(q)`, if `x` and `y` are conjugate.
    pub fn conjugator(&self, x: &PElem, y: &PElem) -> Option<PElem> {
        let n = y.0;
        self.sl2_conjugator(&x.0, &n)
            .or_else(|| self.sl2_conjugator(&x.0, &self.mat_neg(&n)))
            .map(|g| self.canon(&g))
    }
}

/// Basis of the nullspace of a 4x4 matrix over `F_q`.
fn nullspace(f: &FieldCtx, mut rows: [[Fe; 4]; 4]) -> Vec<[Fe; 4]> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..4 {
        let Some(pr) = (r..4).find(|&i| rows[i][col] != f.zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = f.inv(rows[r][col]).expect("pivot nonzero");
        rows[r] = rows[r].map(|x| f.mul(x, inv));
        let pivot_row = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[col] != f.zero() {
                let factor = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == 4 {
            break;
        }
    }
    let free: Vec<usize> = (0..4).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = [f.zero(); 4];
            v[fc] = f.one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(rows[i][fc]);
            }
            v
        })
        .collect()
}
