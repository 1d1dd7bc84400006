//! Brute-force reference computations over an explicit element table.
//!
//! Nothing here uses traces to decide group-theoretic facts: classes are
//! conjugation orbits, orders come from repeated multiplication, and
//! generation is checked by closure.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::classify::ElementCounts;
use crate::error::{Error, Result};
use crate::ff::{Fe, FiniteField};
use crate::products::{FactorMode, ENUMERATION_BUDGET};
use crate::psl2::{ClassId, GroupCtx, Mat2, PElem};

pub struct GroupTable {
    pub ctx: GroupCtx,
    pub elements: Vec<PElem>,
    pub index: HashMap<PElem, u32>,
    /// Element indices grouped by the closed-form class id.
    pub class_partition: BTreeMap<ClassId, Vec<u32>>,
}

/// Lists `PSL2(q)` by sweeping the first row in enc order and solving for the
/// second row.
pub fn enumerate_group(ctx: &GroupCtx) -> Result<GroupTable> {
    if ctx.order() > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            order: ctx.order(),
            budget: ENUMERATION_BUDGET,
        });
    }
    let f = ctx.field();
    let mut elements = Vec::with_capacity(ctx.order() as usize);
    let mut index = HashMap::with_capacity(ctx.order() as usize);
    for a in f.elements() {
        for b in f.elements() {
            if a == f.zero() && b == f.zero() {
                continue;
            }
            for c in f.elements() {
                // a d - b c = 1 with a or b invertible
                let ds: Vec<Fe> = if a != f.zero() {
                    vec![f.div(f.add(f.one(), f.mul(b, c)), a).expect("a != 0")]
                } else {
                    let neg_bc = f.neg(f.mul(b, c));
                    if neg_bc == f.one() {
                        f.elements().collect()
                    } else {
                        vec![]
                    }
                };
                for d in ds {
                    let x = ctx.canon(&Mat2 { a, b, c, d });
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry(x) {
                        e.insert(elements.len() as u32);
                        elements.push(x);
                    }
                }
            }
        }
    }
    if elements.len() as u64 != ctx.order() {
        return Err(Error::Defect(format!(
            "enumerated {} elements, expected {}",
            elements.len(),
            ctx.order()
        )));
    }
    let mut class_partition: BTreeMap<ClassId, Vec<u32>> = BTreeMap::new();
    for (i, x) in elements.iter().enumerate() {
        class_partition
            .entry(ctx.class_id(x))
            .or_default()
            .push(i as u32);
    }
    Ok(GroupTable {
        ctx: ctx.clone(),
        elements,
        index,
        class_partition,
    })
}

impl GroupTable {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn idx(&self, x: &PElem) -> u32 {
        self.index[x]
    }

    pub fn mul(&self, i: u32, j: u32) -> u32 {
        self.idx(
            &self
                .ctx
                .mul(&self.elements[i as usize], &self.elements[j as usize]),
        )
    }

    pub fn inv(&self, i: u32) -> u32 {
        self.idx(&self.ctx.inv(&self.elements[i as usize]))
    }

    pub fn identity(&self) -> u32 {
        self.idx(&self.ctx.identity())
    }

    /// Order by repeated multiplication.
    pub fn naive_order(&self, i: u32) -> u64 {
        let id = self.identity();
        let mut acc = i;
        let mut n = 1;
        while acc != id {
            acc = self.mul(acc, i);
            n += 1;
        }
        n
    }
}

/// Classes present in `C * C` for the class containing `rep`. Since `C * C` is
/// a union of classes, fixing the left factor to `rep` suffices.
pub fn class_square_brute_with(table: &GroupTable, members: &[u32], rep: u32) -> BTreeSet<ClassId> {
    members
        .iter()
        .map(|&j| {
            table
                .ctx
                .class_id(&table.elements[table.mul(rep, j) as usize])
        })
        .collect()
}

pub fn class_square_brute(table: &GroupTable, id: &ClassId) -> Result<BTreeSet<ClassId>> {
    let members = table
        .class_partition
        .get(id)
        .ok_or(Error::UnrealizableClass(*id, table.ctx.q()))?;
    Ok(class_square_brute_with(table, members, members[0]))
}

/// Indices of `<gens>`, sorted.
pub fn closure(table: &GroupTable, gens: &[u32]) -> Vec<u32> {
    let mut seen = vec![false; table.len()];
    let id = table.identity();
    seen[id as usize] = true;
    let mut queue = VecDeque::from([id]);
    let mut out = vec![id];
    while let Some(h) = queue.pop_front() {
        for &g in gens {
            let hg = table.mul(h, g);
            if !seen[hg as usize] {
                seen[hg as usize] = true;
                out.push(hg);
                queue.push_back(hg);
            }
        }
    }
    out.sort_unstable();
    out
}

fn generates(table: &GroupTable, x: u32, y: u32) -> bool {
    closure(table, &[x, y]).len() == table.len()
}

/// Elementary transvections `[[1, t], [0, 1]]` and `[[1, 0], [t, 1]]` for `t`
/// running over the polynomial basis; they generate `SL2(q)`.
pub fn sl2_generators(ctx: &GroupCtx) -> Vec<Mat2> {
    let f = ctx.field();
    let (zero, one) = (f.zero(), f.one());
    let mut out = Vec::new();
    let mut t = 1u64;
    for _ in 0..f.e() {
        let x = f.from_enc(t).expect("basis element");
        out.push(Mat2 {
            a: one,
            b: x,
            c: zero,
            d: one,
        });
        out.push(Mat2 {
            a: one,
            b: zero,
            c: x,
            d: one,
        });
        t *= f.p();
    }
    out
}

/// Conjugacy classes of `PSL2(q)` as orbits under the generators, each sorted,
/// listed by smallest member.
pub fn conjugacy_orbits(table: &GroupTable) -> Vec<Vec<u32>> {
    let ctx = &table.ctx;
    let gens: Vec<PElem> = sl2_generators(ctx).iter().map(|m| ctx.canon(m)).collect();
    let mut orbit_of = vec![u32::MAX; table.len()];
    let mut orbits = Vec::new();
    for start in 0..table.len() as u32 {
        if orbit_of[start as usize] != u32::MAX {
            continue;
        }
        let label = orbits.len() as u32;
        orbit_of[start as usize] = label;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for g in &gens {
                let j = table.idx(&ctx.conj(g, &table.elements[i as usize]));
                if orbit_of[j as usize] == u32::MAX {
                    orbit_of[j as usize] = label;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        orbits.push(members);
    }
    orbits
}

/// Orbits of the non-identity trace-2 matrices of `SL2(q)` under conjugation.
pub fn sl2_trace2_orbits(ctx: &GroupCtx) -> Vec<Vec<Mat2>> {
    let f = ctx.field();
    let two = ctx.two();
    let gens = sl2_generators(ctx);
    let mut todo: BTreeSet<[u32; 4]> = BTreeSet::new();
    for a in f.elements() {
        for b in f.elements() {
            for c in f.elements() {
                let d = f.sub(two, a);
                let m = Mat2 { a, b, c, d };
                if ctx.det(&m) == f.one() && m != ctx.mat_identity() {
                    todo.insert(m.enc4());
                }
            }
        }
    }
    let from = |e: [u32; 4]| ctx.mat_from_enc(e.map(u64::from)).expect("valid");
    let mut orbits = Vec::new();
    while let Some(start) = todo.pop_first() {
        let mut members = vec![from(start)];
        let mut queue = VecDeque::from([from(start)]);
        while let Some(m) = queue.pop_front() {
            for g in &gens {
                let n = ctx.mat_conj(g, &m);
                if todo.remove(&n.enc4()) {
                    members.push(n);
                    queue.push_back(n);
                }
            }
        }
        orbits.push(members);
    }
    orbits
}

/// Traces of elements of each order, by exhaustive sweep (both signs for odd q).
pub fn traces_by_order(table: &GroupTable) -> BTreeMap<u64, BTreeSet<Fe>> {
    let ctx = &table.ctx;
    let f = ctx.field();
    let mut out: BTreeMap<u64, BTreeSet<Fe>> = BTreeMap::new();
    for (i, x) in table.elements.iter().enumerate() {
        let n = table.naive_order(i as u32);
        let t = ctx.trace_of(x);
        let entry = out.entry(n).or_default();
        entry.insert(t);
        entry.insert(f.neg(t));
    }
    out
}

/// Element counts from orders alone: order `p` is unipotent, orders dividing
/// `(q-1)/d` are split, orders dividing `(q+1)/d` are non-split.
pub fn element_counts_brute(table: &GroupTable) -> ElementCounts {
    let ctx = &table.ctx;
    let (q, p, d) = (ctx.q(), ctx.p(), ctx.d());
    let mut counts = ElementCounts {
        unipotent: 0,
        split_ss: 0,
        nonsplit_ss: 0,
        non_q_good_ss: None,
    };
    let mut bad = 0;
    for i in 0..table.len() as u32 {
        let n = table.naive_order(i);
        if n == 1 {
            continue;
        }
        if n == p {
            counts.unipotent += 1;
            continue;
        }
        if ((q - 1) / d) % n == 0 {
            counts.split_ss += 1;
        } else {
            counts.nonsplit_ss += 1;
        }
        if !crate::classify::is_q_good(q, n) {
            bad += 1;
        }
    }
    if ctx.is_odd() {
        counts.non_q_good_ss = Some(bad);
    }
    counts
}

/// Whether some pair of elements of the class generates the group. The pair can
/// be taken with the first element fixed.
pub fn pair_exists_brute(table: &GroupTable, members: &[u32]) -> bool {
    let x = members[0];
    members.iter().any(|&y| generates(table, x, y))
}

/// Whether some `x, y, z` in the class have `x y z = 1` with `<x, y>` the group.
pub fn triple_exists_brute(table: &GroupTable, members: &[u32]) -> bool {
    let x = members[0];
    let member: BTreeSet<u32> = members.iter().copied().collect();
    members.iter().any(|&y| {
        let z = table.inv(table.mul(x, y));
        member.contains(&z) && generates(table, x, y)
    })
}

/// Whether `z = x y` with `x, y` conjugate of the requested type and `<x, y>`
/// the group. Types are decided by order: unipotent means order `p`.
pub fn factorization_exists_brute(
    table: &GroupTable,
    orbits: &[Vec<u32>],
    z: u32,
    mode: FactorMode,
) -> bool {
    let p = table.ctx.p();
    let mut orbit_of = vec![0usize; table.len()];
    for (k, o) in orbits.iter().enumerate() {
        for &i in o {
            orbit_of[i as usize] = k;
        }
    }
    orbits.iter().any(|o| {
        let n = table.naive_order(o[0]);
        let wanted = match mode {
            FactorMode::Semisimple => n != 1 && n != p,
            FactorMode::Unipotent => n == p,
        };
        wanted
            && o.iter().any(|&x| {
                let y = table.mul(table.inv(x), z);
                orbit_of[y as usize] == orbit_of[x as usize] && generates(table, x, y)
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_sizes() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let ctx = GroupCtx::new(q).unwrap();
            let t = enumerate_group(&ctx).unwrap();
            assert_eq!(t.len() as u64, ctx.order());
        }
    }

    #[test]
    fn orbits_match_closed_form_classes() {
        for q in [4, 5, 7, 8, 9, 11] {
            let ctx = GroupCtx::new(q).unwrap();
            let t = enumerate_group(&ctx).unwrap();
            let mut orbits = conjugacy_orbits(&t);
            orbits.sort();
            let mut parts: Vec<Vec<u32>> = t.class_partition.values().cloned().collect();
            for p in &mut parts {
                p.sort_unstable();
            }
            parts.sort();
            assert_eq!(orbits, parts, "q={q}");
        }
    }

    #[test]
    fn closure_of_class_rep_is_cyclic() {
        let ctx = GroupCtx::new(7).unwrap();
        let t = enumerate_group(&ctx).unwrap();
        for (id, members) in &t.class_partition {
            let n = ctx.class_order(id).unwrap();
            assert_eq!(closure(&t, &[members[0]]).len() as u64, n);
            assert_eq!(t.naive_order(members[0]), n);
        }
    }

    #[test]
    fn trace2_orbits_odd_and_even() {
        assert_eq!(sl2_trace2_orbits(&GroupCtx::new(7).unwrap()).len(), 2);
        assert_eq!(sl2_trace2_orbits(&GroupCtx::new(8).unwrap()).len(), 1);
    }
}
