//! Textual class selectors: `id`, `unip:sq`, `unip:nonsq`, `tr:<enc>`, `ord:<n>[:<k>]`.

use psl2_core::{ClassId, ElemType, FiniteField, GroupCtx, SquareClass};

/// The selector that names `id` directly.
pub fn selector_of(id: &ClassId) -> String {
    id.to_string()
}

pub fn valid_selectors(ctx: &GroupCtx) -> Vec<String> {
    ctx.all_class_ids()
        .iter()
        .map(|(id, _)| selector_of(id))
        .collect()
}

fn by_order(ctx: &GroupCtx, n: u64, k: usize) -> Option<ClassId> {
    ctx.all_class_ids()
        .into_iter()
        .map(|(id, _)| id)
        .filter(|id| ctx.class_order(id).ok() == Some(n))
        .nth(k.checked_sub(1)?)
}

fn parse(ctx: &GroupCtx, s: &str) -> Option<ClassId> {
    let f = ctx.field();
    let parts: Vec<&str> = s.split(':').collect();
    let id = match parts.as_slice() {
        ["id"] => ClassId::Identity,
        ["unip", "sq"] => ClassId::Unipotent(SquareClass::Square),
        ["unip", "nonsq"] if ctx.is_odd() => ClassId::Unipotent(SquareClass::Nonsquare),
        ["tr", t] => {
            let t = f.from_enc(t.parse().ok()?)?;
            let canon = t.min(f.neg(t));
            match ctx.trace_type(t) {
                ElemType::SplitSs => ClassId::Split(canon),
                ElemType::NonsplitSs => ClassId::Nonsplit(canon),
                _ => return None,
            }
        }
        ["ord", n] => by_order(ctx, n.parse().ok()?, 1)?,
        ["ord", n, k] => by_order(ctx, n.parse().ok()?, k.parse().ok()?)?,
        _ => return None,
    };
    ctx.is_realizable(&id).then_some(id)
}

/// Resolves a selector or explains which selectors exist for this `q`.
pub fn resolve(ctx: &GroupCtx, s: &str) -> Result<ClassId, String> {
    parse(ctx, s).ok_or_else(|| {
        format!(
            "unknown class selector '{s}' for q={}; valid selectors: {} (or ord:<n>[:<k>])",
            ctx.q(),
            valid_selectors(ctx).join(", ")
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_examples() {
        let c8 = GroupCtx::new(8).unwrap();
        let nine = resolve(&c8, "ord:9").unwrap();
        assert!(matches!(nine, ClassId::Nonsplit(_)));
        assert_eq!(c8.class_order(&nine).unwrap(), 9);
        assert!(resolve(&c8, "ord:9:3").is_ok());
        assert!(resolve(&c8, "ord:9:4").is_err());
        assert!(resolve(&c8, "unip:nonsq").is_err());
        let c7 = GroupCtx::new(7).unwrap();
        assert_eq!(
            resolve(&c7, "tr:6").unwrap(),
            ClassId::Split(c7.field().from_enc(1).unwrap())
        );
        assert!(resolve(&c7, "tr:2").is_err());
        assert!(resolve(&c7, "bogus").unwrap_err().contains("unip:nonsq"));
        for s in valid_selectors(&c7) {
            assert_eq!(selector_of(&resolve(&c7, &s).unwrap()), s);
        }
    }
}
