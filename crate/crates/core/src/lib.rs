//! Conjugacy classes, class products and generation in `PSL2(q)`.

pub mod classify;
pub mod error;
pub mod ff;
pub mod numtheory;
pub mod oracle;
pub mod products;
pub mod psl2;
pub mod verify;

pub use error::{Error, Result};
pub use ff::{make_field, quad_ext, Fe, Fe2, FieldCtx, FiniteField, QuadExt};
pub use psl2::{group_ctx, ClassId, ElemType, GroupCtx, Mat2, PElem, SquareClass};
