//! Exact arithmetic in `F_p`, `F_q = F_p[x]/(f)` and the quadratic extension
//! `F_{q^2} = F_q[z]/(z^2 - s z - t)`.
//!
//! Elements of `F_q` are stored by their canonical integer encoding
//! `enc(a) = sum coeffs[i] * p^i` (polynomial basis). Ordering by `enc` is the
//! total order used for every "smallest" tie-break in the crate.
//!
//! Multiplication in `F_q` goes through discrete log / antilog tables built once
//! per context from the enc-smallest primitive element. Addition is digit-wise
//! mod `p`. The tables are shared behind an `Arc`, so cloning a context is cheap.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numtheory::{gcd, is_prime, prime_factors};

/// Largest supported field size.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;

/// An element of `F_q`, stored by its canonical encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(pub(crate) u32);

impl Fe {
    pub fn enc(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Fe {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

/// Common operations over `F_q` and `F_{q^2}`.
pub trait FiniteField {
    type Elem: Copy + Eq + Ord + std::hash::Hash + fmt::Debug;

    fn size(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    /// The enc-smallest generator of the multiplicative group.
    fn multiplicative_generator(&self) -> Self::Elem;

    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.add(a, self.neg(b))
    }

    fn square(&self, a: Self::Elem) -> Self::Elem {
        self.mul(a, a)
    }

    fn pow(&self, a: Self::Elem, mut k: u64) -> Self::Elem {
        let mut base = a;
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    fn mult_order(&self, a: Self::Elem) -> u64 {
        assert!(a != self.zero(), "zero has no multiplicative order");
        let mut n = self.size() - 1;
        for r in prime_factors(n) {
            while n.is_multiple_of(r) && self.pow(a, n / r) == self.one() {
                n /= r;
            }
        }
        n
    }
}

/// The elements of multiplicative order exactly `n`.
///
/// Empty unless `n` divides `|F| - 1`; otherwise of size `phi(n)`.
pub fn primitive_roots<F: FiniteField>(field: &F, n: u64) -> BTreeSet<F::Elem> {
    let m = field.size() - 1;
    if n == 0 || !m.is_multiple_of(n) {
        return BTreeSet::new();
    }
    let h = field.pow(field.multiplicative_generator(), m / n);
    let mut out = BTreeSet::new();
    let mut x = field.one();
    for k in 1..=n {
        x = field.mul(x, h);
        if gcd(k, n) == 1 {
            out.insert(x);
        }
    }
    out
}

// Polynomials over F_p, coefficient vectors low-degree first, no trailing zeros
// except for the zero polynomial which is the empty vector.

fn poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = poly_trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, &mi) in m.iter().enumerate() {
            r[k + i] = (r[k + i] + p - c * mi % p) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    poly_rem(&out, m, p)
}

fn poly_powmod(a: &[u64], mut k: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut base = poly_rem(a, m, p);
    let mut acc = vec![1u64];
    while k > 0 {
        if k & 1 == 1 {
            acc = poly_mulmod(&acc, &base, m, p);
        }
        base = poly_mulmod(&base, &base, m, p);
        k >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = poly_trim(a.to_vec());
    let mut b = poly_trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a % p, p - 2, p)
}

fn mod_pow(mut a: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * a % p;
        }
        a = a * a % p;
        k >>= 1;
    }
    acc
}

/// Irreducibility of a monic polynomial over `F_p`: no factor of degree `<= deg/2`,
/// checked through `gcd(x^{p^k} - x, f) = 1`.
pub fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let f = poly_trim(poly.to_vec());
    let deg = match f.len() {
        0 | 1 => return false,
        n => n - 1,
    };
    if deg == 1 {
        return true;
    }
    let x = vec![0, 1];
    let mut xpk = x.clone();
    for _ in 1..=deg / 2 {
        xpk = poly_powmod(&xpk, p, &f, p);
        let mut h = xpk.clone();
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        let g = poly_gcd(&poly_trim(h), &f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible of degree `e` over `F_p`, ordering polynomials by
/// their value at `x = p` (so `x^3 + x + 1` precedes `x^3 + x^2 + 1`).
pub fn smallest_irreducible(p: u64, e: u32) -> Vec<u64> {
    let count = p.pow(e);
    for idx in 0..count {
        let mut poly = vec![0u64; e as usize + 1];
        let mut rest = idx;
        for c in poly.iter_mut().take(e as usize) {
            *c = rest % p;
            rest /= p;
        }
        poly[e as usize] = 1;
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

struct FieldTables {
    p: u32,
    e: u32,
    q: u32,
    poly: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    generator: Fe,
    nonsquare: Option<Fe>,
    trace_one: Option<Fe>,
}

/// The field `F_q`, `q = p^e`, with a fixed defining polynomial.
#[derive(Clone)]
pub struct FieldCtx {
    inner: Arc<FieldTables>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.inner.p)
            .field("e", &self.inner.e)
            .field("defining_poly", &self.inner.poly)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p && self.inner.e == other.inner.e
    }
}

impl Eq for FieldCtx {}

/// Builds `F_{p^e}` over the lexicographically smallest monic irreducible.
pub fn make_field(p: u64, e: u32) -> Result<FieldCtx> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if e == 0 {
        return Err(Error::ZeroDegree);
    }
    let q = p
        .checked_pow(e)
        .filter(|&q| q <= MAX_FIELD_SIZE)
        .ok_or(Error::FieldTooLarge { p, e })?;

    let poly = if e == 1 {
        vec![0, 1]
    } else {
        smallest_irreducible(p, e)
    };
    let poly_u32: Vec<u32> = poly.iter().map(|&c| c as u32).collect();

    let enc_of = |v: &[u64]| -> u32 {
        let mut acc = 0u64;
        for &c in v.iter().rev() {
            acc = acc * p + c;
        }
        acc as u32
    };
    let poly_of = |mut k: u64| -> Vec<u64> {
        let mut v = Vec::with_capacity(e as usize);
        for _ in 0..e {
            v.push(k % p);
            k /= p;
        }
        poly_trim(v)
    };
    let slow_mul = |a: u64, b: u64| -> u64 {
        if e == 1 {
            a * b % p
        } else {
            enc_of(&poly_mulmod(&poly_of(a), &poly_of(b), &poly, p)) as u64
        }
    };
    let slow_pow = |a: u64, mut k: u64| -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = slow_mul(acc, base);
            }
            base = slow_mul(base, base);
            k >>= 1;
        }
        acc
    };

    let order = q - 1;
    let factors = prime_factors(order);
    let generator = if q == 2 {
        1
    } else {
        (2..q)
            .find(|&g| factors.iter().all(|&r| slow_pow(g, order / r) != 1))
            .expect("multiplicative group is cyclic")
    };

    let n = order as usize;
    let mut exp = vec![0u32; 2 * n];
    let mut log = vec![0u32; q as usize];
    let mut x = 1u64;
    for (i, slot) in exp.iter_mut().take(n).enumerate() {
        *slot = x as u32;
        log[x as usize] = i as u32;
        x = slow_mul(x, generator);
    }
    debug_assert_eq!(x, 1, "generator order mismatch");
    for i in 0..n {
        exp[n + i] = exp[i];
    }

    let mut ctx = FieldCtx {
        inner: Arc::new(FieldTables {
            p: p as u32,
            e,
            q: q as u32,
            poly: poly_u32,
            exp,
            log,
            generator: Fe(generator as u32),
            nonsquare: None,
            trace_one: None,
        }),
    };
    let nonsquare = if p == 2 {
        None
    } else {
        ctx.elements().find(|&a| !ctx.is_square(a))
    };
    let trace_one = if p == 2 {
        ctx.elements().find(|&a| ctx.absolute_trace(a) == ctx.one())
    } else {
        None
    };
    let inner = Arc::get_mut(&mut ctx.inner).expect("unshared during construction");
    inner.nonsquare = nonsquare;
    inner.trace_one = trace_one;
    Ok(ctx)
}

impl FieldCtx {
    pub fn p(&self) -> u64 {
        self.inner.p as u64
    }

    pub fn e(&self) -> u32 {
        self.inner.e
    }

    pub fn q(&self) -> u64 {
        self.inner.q as u64
    }

    /// Monic defining polynomial over `F_p`, low-degree first (length `e + 1`).
    /// For `e = 1` this is `x`.
    pub fn defining_poly(&self) -> &[u32] {
        &self.inner.poly
    }

    pub fn is_odd(&self) -> bool {
        self.inner.p != 2
    }

    /// Element from its encoding, if in range.
    pub fn from_enc(&self, enc: u64) -> Option<Fe> {
        (enc < self.q()).then_some(Fe(enc as u32))
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.inner.p as i64) as u32)
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.0 < self.inner.q
    }

    /// All elements in enc order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.inner.q).map(Fe)
    }

    /// Coefficients of `a` in the polynomial basis, low-degree first.
    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        let p = self.inner.p;
        let mut k = a.0;
        (0..self.inner.e)
            .map(|_| {
                let c = k % p;
                k /= p;
                c
            })
            .collect()
    }

    /// The enc-smallest non-square (odd characteristic only).
    pub fn nonsquare(&self) -> Option<Fe> {
        self.inner.nonsquare
    }

    /// The enc-smallest element of absolute trace 1 (characteristic 2 only).
    pub fn trace_one_element(&self) -> Option<Fe> {
        self.inner.trace_one
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        let n = self.inner.q - 1;
        let l = self.inner.log[a.0 as usize];
        Some(Fe(self.inner.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// Schoolbook multiplication through the defining polynomial, bypassing the
    /// log tables. Used to cross-check them.
    pub fn mul_schoolbook(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p();
        let poly: Vec<u64> = self.inner.poly.iter().map(|&c| c as u64).collect();
        let to_poly = |x: Fe| -> Vec<u64> { self.coeffs(x).into_iter().map(u64::from).collect() };
        if self.inner.e == 1 {
            return Fe(((a.0 as u64 * b.0 as u64) % p) as u32);
        }
        let prod = poly_mulmod(&to_poly(a), &to_poly(b), &poly, p);
        let mut acc = 0u64;
        for &c in prod.iter().rev() {
            acc = acc * p + c;
        }
        Fe(acc as u32)
    }

    /// Absolute trace `F_q -> F_p`, `a + a^p + ... + a^{p^{e-1}}`.
    pub fn absolute_trace(&self, a: Fe) -> Fe {
        let mut acc = self.zero();
        let mut x = a;
        for _ in 0..self.inner.e {
            acc = self.add(acc, x);
            x = self.pow(x, self.p());
        }
        acc
    }

    /// True iff `a = c^2` for some `c` in the field.
    pub fn is_square(&self, a: Fe) -> bool {
        if !self.is_odd() || a.0 == 0 {
            return true;
        }
        self.pow(a, (self.q() - 1) / 2) == self.one()
    }

    /// A square root of `a` when one exists; the enc-smaller of the two roots.
    ///
    /// Tonelli-Shanks in odd characteristic, `a^{q/2}` in characteristic 2.
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return Some(a);
        }
        if !self.is_odd() {
            let mut r = a;
            for _ in 1..self.inner.e {
                r = self.square(r);
            }
            return Some(r);
        }
        if !self.is_square(a) {
            return None;
        }
        let q = self.q();
        let mut s = 0u32;
        let mut t = q - 1;
        while t.is_multiple_of(2) {
            t /= 2;
            s += 1;
        }
        let z = self.nonsquare().expect("odd field has a non-square");
        let mut m = s;
        let mut c = self.pow(z, t);
        let mut u = self.pow(a, t);
        let mut r = self.pow(a, t.div_ceil(2));
        while u != self.one() {
            let mut i = 0;
            let mut u2 = u;
            while u2 != self.one() {
                u2 = self.square(u2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.square(b);
            }
            m = i;
            c = self.square(b);
            u = self.mul(u, c);
            r = self.mul(r, b);
        }
        debug_assert_eq!(self.square(r), a);
        Some(r.min(self.neg(r)))
    }

    /// Solves `y^2 + y = w` in characteristic 2. Returns one root `y` (the other
    /// is `y + 1`), or `None` when the absolute trace of `w` is 1.
    fn artin_schreier(&self, w: Fe) -> Option<Fe> {
        let e = self.inner.e;
        let y = if e % 2 == 1 {
            // half-trace: sum of w^{4^i}, i = 0..(e-1)/2
            let mut acc = self.zero();
            let mut x = w;
            for _ in 0..=(e - 1) / 2 {
                acc = self.add(acc, x);
                x = self.square(self.square(x));
            }
            acc
        } else {
            // y = sum_{i=0}^{e-2} (sum_{j=i+1}^{e-1} d^{2^j}) w^{2^i} with Tr(d) = 1
            let d = self
                .trace_one_element()
                .expect("char 2 field has a trace-one element");
            let mut d_pows = Vec::with_capacity(e as usize);
            let mut x = d;
            for _ in 0..e {
                d_pows.push(x);
                x = self.square(x);
            }
            let mut acc = self.zero();
            let mut w_pow = w;
            for i in 0..(e as usize - 1) {
                let inner = d_pows[i + 1..]
                    .iter()
                    .fold(self.zero(), |s, &v| self.add(s, v));
                acc = self.add(acc, self.mul(inner, w_pow));
                w_pow = self.square(w_pow);
            }
            acc
        };
        (self.add(self.square(y), y) == w).then_some(y)
    }

    /// All roots of `z^2 + b z + c` in the field.
    pub fn solve_monic_quadratic(&self, b: Fe, c: Fe) -> BTreeSet<Fe> {
        let mut roots = BTreeSet::new();
        if self.is_odd() {
            let disc = self.sub(self.square(b), self.mul(self.from_int(4), c));
            if let Some(r) = self.sqrt(disc) {
                let half = self.inv(self.from_int(2)).expect("2 is invertible");
                let nb = self.neg(b);
                roots.insert(self.mul(self.add(nb, r), half));
                roots.insert(self.mul(self.sub(nb, r), half));
            }
        } else if b.0 == 0 {
            roots.insert(self.sqrt(c).expect("squaring is bijective in char 2"));
        } else {
            // z = b y turns the equation into y^2 + y = c / b^2
            let w = self.div(c, self.square(b)).expect("b nonzero");
            if let Some(y) = self.artin_schreier(w) {
                roots.insert(self.mul(b, y));
                roots.insert(self.mul(b, self.add(y, self.one())));
            }
        }
        roots
    }

    /// Number of roots of `z^2 + b z + c`, by exhaustive scan.
    #[doc(hidden)]
    pub fn roots_by_scan(&self, b: Fe, c: Fe) -> BTreeSet<Fe> {
        self.elements()
            .filter(|&z| self.add(self.add(self.square(z), self.mul(b, z)), c) == self.zero())
            .collect()
    }
}

impl FiniteField for FieldCtx {
    type Elem = Fe;

    fn size(&self) -> u64 {
        self.q()
    }

    fn zero(&self) -> Fe {
        Fe(0)
    }

    fn one(&self) -> Fe {
        Fe(1)
    }

    fn add(&self, a: Fe, b: Fe) -> Fe {
        let t = &self.inner;
        if t.e == 1 {
            let s = a.0 + b.0;
            return Fe(if s >= t.p { s - t.p } else { s });
        }
        if t.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut acc = 0u32;
        let mut place = 1u32;
        for _ in 0..t.e {
            let s = (x % t.p + y % t.p) % t.p;
            acc += s * place;
            place *= t.p;
            x /= t.p;
            y /= t.p;
        }
        Fe(acc)
    }

    fn neg(&self, a: Fe) -> Fe {
        let t = &self.inner;
        if t.p == 2 {
            return a;
        }
        if t.e == 1 {
            return Fe(if a.0 == 0 { 0 } else { t.p - a.0 });
        }
        let mut x = a.0;
        let mut acc = 0u32;
        let mut place = 1u32;
        for _ in 0..t.e {
            let c = x % t.p;
            acc += ((t.p - c) % t.p) * place;
            place *= t.p;
            x /= t.p;
        }
        Fe(acc)
    }

    fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        let t = &self.inner;
        Fe(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    fn pow(&self, a: Fe, k: u64) -> Fe {
        if k == 0 {
            return Fe(1);
        }
        if a.0 == 0 {
            return Fe(0);
        }
        let t = &self.inner;
        let n = (t.q - 1) as u64;
        let l = t.log[a.0 as usize] as u64 * (k % n) % n;
        Fe(t.exp[l as usize])
    }

    fn multiplicative_generator(&self) -> Fe {
        self.inner.generator
    }
}

/// An element `re + im * z` of `F_{q^2}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Fe2 {
    // im first so that the derived order agrees with enc = re + im * q
    pub im: Fe,
    pub re: Fe,
}

/// `F_{q^2}` layered over `F_q` as `F_q[z]/(z^2 - s z - t)`.
///
/// Odd `q`: `z^2 = nu` with `nu` the enc-smallest non-square, so the adjoined
/// generator squares into the base field. Even `q`: `z^2 + z + nu` with `nu` the
/// enc-smallest element of absolute trace 1.
#[derive(Clone, Debug)]
pub struct QuadExt {
    base: FieldCtx,
    s: Fe,
    t: Fe,
    generator: Fe2,
}

/// Builds the quadratic extension of `base`.
pub fn quad_ext(base: &FieldCtx) -> QuadExt {
    let (s, t) = if base.is_odd() {
        (
            base.zero(),
            base.nonsquare().expect("odd field has a non-square"),
        )
    } else {
        // z^2 + z + nu = 0  <=>  z^2 = z + nu in characteristic 2
        (
            base.one(),
            base.trace_one_element()
                .expect("char 2 field has a trace-one element"),
        )
    };
    let mut ext = QuadExt {
        base: base.clone(),
        s,
        t,
        generator: Fe2::default(),
    };
    let order = ext.size() - 1;
    let factors = prime_factors(order);
    let generator = ext
        .elements()
        .skip(1)
        .find(|&g| factors.iter().all(|&r| ext.pow(g, order / r) != ext.one()))
        .expect("multiplicative group is cyclic");
    ext.generator = generator;
    ext
}

impl QuadExt {
    pub fn base(&self) -> &FieldCtx {
        &self.base
    }

    /// Defining polynomial `z^2 + b1 z + b0` as `(b0, b1)`.
    pub fn defining_poly(&self) -> (Fe, Fe) {
        (self.base.neg(self.t), self.base.neg(self.s))
    }

    /// The adjoined generator `z`.
    pub fn gen_z(&self) -> Fe2 {
        Fe2 {
            re: Fe(0),
            im: Fe(1),
        }
    }

    pub fn embed(&self, a: Fe) -> Fe2 {
        Fe2 { re: a, im: Fe(0) }
    }

    /// Coerces a Frobenius-fixed element back into `F_q`.
    pub fn to_base(&self, b: Fe2) -> Option<Fe> {
        (b.im.0 == 0).then_some(b.re)
    }

    pub fn enc(&self, b: Fe2) -> u64 {
        b.re.0 as u64 + b.im.0 as u64 * self.base.q()
    }

    pub fn from_enc(&self, enc: u64) -> Option<Fe2> {
        let q = self.base.q();
        (enc < q * q).then(|| Fe2 {
            re: Fe((enc % q) as u32),
            im: Fe((enc / q) as u32),
        })
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe2> + '_ {
        let q = self.base.q();
        (0..q * q).map(move |k| Fe2 {
            re: Fe((k % q) as u32),
            im: Fe((k / q) as u32),
        })
    }

    /// `b -> b^q`, using that the conjugate of `z` is `s - z`.
    pub fn frobenius(&self, b: Fe2) -> Fe2 {
        let f = &self.base;
        Fe2 {
            re: f.add(b.re, f.mul(b.im, self.s)),
            im: f.neg(b.im),
        }
    }

    /// `b + b^q`, landing in `F_q`.
    pub fn trace_to_base(&self, b: Fe2) -> Fe {
        let t = self.add(b, self.frobenius(b));
        self.to_base(t).expect("trace is Frobenius-fixed")
    }

    pub fn inv(&self, b: Fe2) -> Option<Fe2> {
        let f = &self.base;
        let conj = self.frobenius(b);
        let norm = self.to_base(self.mul(b, conj))?;
        let ni = f.inv(norm)?;
        Some(Fe2 {
            re: f.mul(conj.re, ni),
            im: f.mul(conj.im, ni),
        })
    }
}

impl FiniteField for QuadExt {
    type Elem = Fe2;

    fn size(&self) -> u64 {
        self.base.q() * self.base.q()
    }

    fn zero(&self) -> Fe2 {
        Fe2::default()
    }

    fn one(&self) -> Fe2 {
        Fe2 {
            re: Fe(1),
            im: Fe(0),
        }
    }

    fn add(&self, a: Fe2, b: Fe2) -> Fe2 {
        Fe2 {
            re: self.base.add(a.re, b.re),
            im: self.base.add(a.im, b.im),
        }
    }

    fn neg(&self, a: Fe2) -> Fe2 {
        Fe2 {
            re: self.base.neg(a.re),
            im: self.base.neg(a.im),
        }
    }

    fn mul(&self, a: Fe2, b: Fe2) -> Fe2 {
        let f = &self.base;
        let hh = f.mul(a.im, b.im);
        Fe2 {
            re: f.add(f.mul(a.re, b.re), f.mul(hh, self.t)),
            im: f.add(
                f.add(f.mul(a.re, b.im), f.mul(a.im, b.re)),
                f.mul(hh, self.s),
            ),
        }
    }

    fn multiplicative_generator(&self) -> Fe2 {
        self.generator
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_poly_is_x() {
        let f = make_field(7, 1).unwrap();
        assert_eq!(f.defining_poly(), &[0, 1]);
        assert_eq!(f.q(), 7);
    }

    fn brute_smallest_irreducible(p: u64, e: u32) -> Vec<u64> {
        // same scan order, testing irreducibility by the absence of roots
        // (valid for e <= 3)
        assert!(e <= 3);
        let count = p.pow(e);
        for idx in 0..count {
            let mut poly = vec![0u64; e as usize + 1];
            let mut rest = idx;
            for c in poly.iter_mut().take(e as usize) {
                *c = rest % p;
                rest /= p;
            }
            poly[e as usize] = 1;
            let has_root =
                (0..p).any(|x| poly.iter().rev().fold(0u64, |acc, &c| (acc * x + c) % p) == 0);
            if !has_root {
                return poly;
            }
        }
        unreachable!()
    }

    #[test]
    fn defining_polys_match_root_scan() {
        assert_eq!(brute_smallest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(brute_smallest_irreducible(2, 3), vec![1, 1, 0, 1]);
        for &(p, e) in &[(2, 2), (2, 3), (3, 2), (3, 3), (5, 2), (7, 2), (5, 3)] {
            let f = make_field(p, e).unwrap();
            let got: Vec<u64> = f.defining_poly().iter().map(|&c| c as u64).collect();
            assert_eq!(got, brute_smallest_irreducible(p, e), "p={p} e={e}");
        }
    }

    #[test]
    fn f9_and_f8_polys() {
        assert_eq!(make_field(3, 2).unwrap().defining_poly(), &[1, 0, 1]);
        assert_eq!(make_field(2, 3).unwrap().defining_poly(), &[1, 1, 0, 1]);
    }

    #[test]
    fn irreducibility_general_degree() {
        // x^4 + x + 1 irreducible over F2; x^4 + x^2 + 1 = (x^2+x+1)^2 is not
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1, 0, 1], 2));
        let f16 = make_field(2, 4).unwrap();
        assert_eq!(f16.defining_poly(), &[1, 1, 0, 0, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(make_field(9, 1), Err(Error::NotPrime(9))));
        assert!(matches!(make_field(1, 1), Err(Error::NotPrime(1))));
        assert!(matches!(make_field(2, 0), Err(Error::ZeroDegree)));
        assert!(matches!(
            make_field(2, 21),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(make_field(2, 20).is_ok());
    }

    #[test]
    fn deterministic_construction() {
        let a = make_field(3, 3).unwrap();
        let b = make_field(3, 3).unwrap();
        assert_eq!(a.defining_poly(), b.defining_poly());
        assert_eq!(a, b);
    }

    #[test]
    fn log_tables_agree_with_schoolbook() {
        for &(p, e) in &[(2, 1), (2, 4), (3, 3), (5, 2), (7, 1), (7, 2)] {
            let f = make_field(p, e).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul_schoolbook(a, b));
                }
            }
        }
    }

    #[test]
    fn small_squares_mod_7() {
        let f = make_field(7, 1).unwrap();
        let squares: BTreeSet<u32> = f.elements().map(|a| f.square(a).enc()).collect();
        assert_eq!(squares, BTreeSet::from([0, 1, 2, 4]));
        assert!(f.is_square(Fe(2)));
        assert!(!f.is_square(Fe(3)));
        assert!(f.is_square(Fe(0)));
        assert_eq!(f.sqrt(Fe(2)), Some(Fe(3)));
        assert_eq!(f.sqrt(Fe(3)), None);
    }

    #[test]
    fn sqrt_char2_is_fourth_power_in_f8() {
        let f = make_field(2, 3).unwrap();
        for a in f.elements() {
            assert_eq!(f.sqrt(a), Some(f.pow(a, 4)));
        }
    }

    #[test]
    fn quadratic_examples() {
        let f7 = make_field(7, 1).unwrap();
        assert_eq!(
            f7.solve_monic_quadratic(Fe(0), f7.from_int(-2)),
            BTreeSet::from([Fe(3), Fe(4)])
        );
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(
            f5.solve_monic_quadratic(Fe(0), Fe(0)),
            BTreeSet::from([Fe(0)])
        );
        let f2 = make_field(2, 1).unwrap();
        let f4 = make_field(2, 2).unwrap();
        // nu of F2 has trace 1; z^2 + z + nu has no root in F4 when Tr_{F4}(nu) = 1
        for nu in f4.elements().filter(|&a| f4.absolute_trace(a) == f4.one()) {
            assert!(f4.solve_monic_quadratic(f4.one(), nu).is_empty());
            assert!(f4.roots_by_scan(f4.one(), nu).is_empty());
        }
        assert_eq!(f2.trace_one_element(), Some(Fe(1)));
    }

    #[test]
    fn quadratic_solver_matches_scan_everywhere_small() {
        for &(p, e) in &[
            (2, 1),
            (2, 2),
            (2, 3),
            (2, 4),
            (3, 1),
            (3, 2),
            (3, 3),
            (5, 1),
            (5, 2),
            (7, 1),
        ] {
            let f = make_field(p, e).unwrap();
            for b in f.elements() {
                for c in f.elements() {
                    assert_eq!(
                        f.solve_monic_quadratic(b, c),
                        f.roots_by_scan(b, c),
                        "p={p} e={e} b={b} c={c}"
                    );
                }
            }
        }
    }

    #[test]
    fn quad_ext_defining_polys() {
        let f3 = make_field(3, 1).unwrap();
        let e9 = quad_ext(&f3);
        assert_eq!(e9.defining_poly(), (Fe(1), Fe(0))); // z^2 - 2 = z^2 + 1
        assert_eq!(f3.nonsquare(), Some(Fe(2)));
        let f2 = make_field(2, 1).unwrap();
        let e4 = quad_ext(&f2);
        assert_eq!(e4.defining_poly(), (Fe(1), Fe(1))); // z^2 + z + 1
        let z = e9.gen_z();
        assert_eq!(e9.to_base(e9.square(z)), f3.nonsquare());
    }

    #[test]
    fn frobenius_fixes_exactly_base_field() {
        for &(p, e) in &[(7, 1), (2, 2), (3, 2), (2, 1)] {
            let f = make_field(p, e).unwrap();
            let ext = quad_ext(&f);
            let fixed: Vec<Fe2> = ext.elements().filter(|&b| ext.pow(b, f.q()) == b).collect();
            assert_eq!(fixed.len() as u64, f.q());
            for b in ext.elements() {
                assert_eq!(ext.frobenius(b), ext.pow(b, f.q()));
            }
            assert!(fixed.iter().all(|&b| ext.to_base(b).is_some()));
        }
    }

    #[test]
    fn ext_inverse_and_generator() {
        let f = make_field(5, 1).unwrap();
        let ext = quad_ext(&f);
        for b in ext.elements().skip(1) {
            assert_eq!(ext.mul(b, ext.inv(b).unwrap()), ext.one());
        }
        assert_eq!(ext.mult_order(ext.multiplicative_generator()), 24);
    }

    #[test]
    fn primitive_root_examples() {
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(primitive_roots(&f5, 4), BTreeSet::from([Fe(2), Fe(3)]));
        assert_eq!(primitive_roots(&f5, 1), BTreeSet::from([Fe(1)]));
        assert!(primitive_roots(&f5, 3).is_empty());
        let f7 = make_field(7, 1).unwrap();
        assert_eq!(primitive_roots(&f7, 3), BTreeSet::from([Fe(2), Fe(4)]));
    }

    #[test]
    fn primitive_roots_match_order_scan() {
        for &(p, e) in &[(2, 3), (3, 2), (5, 2), (7, 1), (2, 4)] {
            let f = make_field(p, e).unwrap();
            for n in 1..=f.q() {
                let scan: BTreeSet<Fe> = f
                    .elements()
                    .skip(1)
                    .filter(|&a| f.mult_order(a) == n)
                    .collect();
                assert_eq!(primitive_roots(&f, n), scan);
            }
            let ext = quad_ext(&f);
            for n in [2, 3, 4, 8, f.q() + 1, 2 * (f.q() + 1)] {
                let scan: BTreeSet<Fe2> = ext
                    .elements()
                    .skip(1)
                    .filter(|&b| {
                        ext.pow(b, n) == ext.one()
                            && (1..n).all(|k| n % k != 0 || ext.pow(b, k) != ext.one())
                    })
                    .collect();
                assert_eq!(primitive_roots(&ext, n), scan, "p={p} e={e} n={n}");
            }
        }
    }
}
