//! Trace sets of element orders, q-minimal and q-good orders, good/bad traces,
//! counting formulas and the orders table.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{primitive_roots, Fe, FiniteField};
use crate::numtheory::{divisors, gcd, prime_power};
use crate::psl2::{ElemType, GroupCtx};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structural {
    Unipotent,
    Split,
    Nonsplit,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Good,
    Bad,
    NotApplicable,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct TraceKind {
    pub structural: Structural,
    pub quality: Quality,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct OrdersRow {
    pub q: u64,
    pub unipotent_order: u64,
    pub minimal_good: Vec<u64>,
    pub minimal_not_good: Vec<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct TraceCounts {
    pub unipotent: u64,
    pub split: u64,
    pub nonsplit: u64,
    /// Odd `q` only.
    pub bad: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct ElementCounts {
    pub unipotent: u64,
    pub split_ss: u64,
    pub nonsplit_ss: u64,
    /// Odd `q` only.
    pub non_q_good_ss: Option<u64>,
}

fn decompose(q: u64) -> Result<(u64, u32)> {
    prime_power(q).ok_or(Error::NotPrimePower(q))
}

/// Element orders `> 1` of `PSL2(q)`: the divisors of `p`, `(q-1)/d`, `(q+1)/d`.
pub fn element_orders(q: u64) -> Result<Vec<u64>> {
    let (p, _) = decompose(q)?;
    let d = if p == 2 { 1 } else { 2 };
    let mut out: Vec<u64> = divisors(p)
        .into_iter()
        .chain(divisors((q - 1) / d))
        .chain(divisors((q + 1) / d))
        .filter(|&n| n > 1)
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `T_q(n)`: traces of lifts of elements of order `n`.
///
/// For odd `q` both signs are included since `A` and `-A` lift the same element.
/// Non-split traces are computed as `b + b^q` in `F_{q^2}` and coerced back.
pub fn trace_set(ctx: &GroupCtx, n: u64) -> BTreeSet<Fe> {
    let f = ctx.field();
    let ext = ctx.ext();
    let q = ctx.q();
    let mut out = BTreeSet::new();
    if n < 2 {
        return out;
    }
    let coerce = |b| {
        let t = ext.add(b, ext.frobenius(b));
        debug_assert_eq!(ext.frobenius(t), t);
        ext.to_base(t).expect("b + b^q is Frobenius-fixed")
    };
    if !ctx.is_odd() {
        if n == 2 {
            out.insert(f.zero());
        } else if (q - 1).is_multiple_of(n) {
            for a in primitive_roots(f, n) {
                out.insert(f.add(a, f.inv(a).expect("root of unity")));
            }
        } else if (q + 1).is_multiple_of(n) {
            for b in primitive_roots(ext, n) {
                out.insert(coerce(b));
            }
        }
        return out;
    }
    let mut insert_pm = |t: Fe| {
        out.insert(t);
        out.insert(f.neg(t));
    };
    if n == ctx.p() {
        insert_pm(ctx.two());
    } else if ((q - 1) / 2).is_multiple_of(n) {
        for a in primitive_roots(f, 2 * n) {
            insert_pm(f.add(a, f.inv(a).expect("root of unity")));
        }
    } else if q.div_ceil(2).is_multiple_of(n) {
        for b in primitive_roots(ext, 2 * n) {
            insert_pm(coerce(b));
        }
    }
    out
}

/// Whether `n` is q-minimal: `e` is the least `f > 0` with
/// `p^f = ±1 mod gcd(2, n) n`. The unipotent order `n = p` is q-minimal
/// exactly when `e = 1`.
pub fn is_q_minimal(q: u64, n: u64) -> Result<bool> {
    let (p, e) = decompose(q)?;
    if !element_orders(q)?.contains(&n) {
        return Err(Error::NotAnElementOrder { q, n });
    }
    if n == p {
        return Ok(e == 1);
    }
    let m = gcd(2, n) * n;
    let mut pf = 1u64;
    for f in 1..=e {
        pf = pf * p % m;
        if pf == 1 % m || pf == m - 1 {
            return Ok(f == e);
        }
    }
    unreachable!("q itself satisfies the congruence for every semisimple order")
}

/// Whether `n` is q-good: odd and dividing `q - 1` or `q + 1`, or even with
/// `4n` dividing `q - 1` or `q + 1`.
pub fn is_q_good(q: u64, n: u64) -> bool {
    let divides_either = |k: u64| (q - 1).is_multiple_of(k) || (q + 1).is_multiple_of(k);
    if n % 2 == 1 {
        divides_either(n)
    } else {
        divides_either(4 * n)
    }
}

pub fn trace_kind(ctx: &GroupCtx, alpha: Fe) -> TraceKind {
    let f = ctx.field();
    let structural = match ctx.trace_type(alpha) {
        ElemType::Unipotent => Structural::Unipotent,
        ElemType::SplitSs => Structural::Split,
        _ => Structural::Nonsplit,
    };
    let quality = if !ctx.is_odd() || structural == Structural::Unipotent {
        Quality::NotApplicable
    } else {
        let two = ctx.two();
        if f.is_square(f.add(two, alpha)) || f.is_square(f.sub(two, alpha)) {
            Quality::Good
        } else {
            Quality::Bad
        }
    };
    TraceKind {
        structural,
        quality,
    }
}

/// Counts by classifying every element of `F_q` as a trace.
pub fn trace_counts(ctx: &GroupCtx) -> TraceCounts {
    let mut c = TraceCounts {
        unipotent: 0,
        split: 0,
        nonsplit: 0,
        bad: ctx.is_odd().then_some(0),
    };
    for alpha in ctx.field().elements() {
        let k = trace_kind(ctx, alpha);
        match k.structural {
            Structural::Unipotent => c.unipotent += 1,
            Structural::Split => c.split += 1,
            Structural::Nonsplit => c.nonsplit += 1,
        }
        if k.quality == Quality::Bad {
            *c.bad.as_mut().expect("odd q") += 1;
        }
    }
    c
}

/// Closed-form trace counts.
pub fn closed_form_trace_counts(q: u64) -> TraceCounts {
    if q.is_multiple_of(2) {
        TraceCounts {
            unipotent: 1,
            split: (q - 2) / 2,
            nonsplit: q / 2,
            bad: None,
        }
    } else {
        TraceCounts {
            unipotent: 2,
            split: (q - 3) / 2,
            nonsplit: (q - 1) / 2,
            bad: Some(if q % 4 == 1 { (q - 1) / 4 } else { (q + 1) / 4 }),
        }
    }
}

/// Closed-form element counts by type.
pub fn element_counts(q: u64) -> ElementCounts {
    if q.is_multiple_of(2) {
        ElementCounts {
            unipotent: q * q - 1,
            split_ss: q * (q + 1) * (q - 2) / 2,
            nonsplit_ss: q * q * (q - 1) / 2,
            non_q_good_ss: None,
        }
    } else {
        ElementCounts {
            unipotent: q * q - 1,
            split_ss: q * (q + 1) * (q - 3) / 4,
            nonsplit_ss: q * (q - 1) * (q - 1) / 4,
            non_q_good_ss: Some(q * (q * q - 1) / 8),
        }
    }
}

/// The q-minimal orders of `PSL2(q)` other than the unipotent order, split by
/// q-goodness.
pub fn orders_table(q: u64) -> Result<OrdersRow> {
    let (p, _) = decompose(q)?;
    let mut row = OrdersRow {
        q,
        unipotent_order: p,
        minimal_good: Vec::new(),
        minimal_not_good: Vec::new(),
    };
    for n in element_orders(q)? {
        if n == p || !is_q_minimal(q, n)? {
            continue;
        }
        if is_q_good(q, n) {
            row.minimal_good.push(n);
        } else {
            row.minimal_not_good.push(n);
        }
    }
    Ok(row)
}
