use thiserror::Error;

use crate::psl2::ClassId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field size {p}^{e} exceeds the supported maximum")]
    FieldTooLarge { p: u64, e: u32 },
    #[error("matrix entries are not elements of this field")]
    ForeignElement,
    #[error("matrix determinant is not 1")]
    NotUnimodular,
    #[error("class {0:?} does not occur in PSL2({1})")]
    UnrealizableClass(ClassId, u64),
    #[error("the identity class is not allowed here")]
    IdentityClass,
    #[error("the identity element is not allowed here")]
    IdentityElement,
    #[error("{n} is not an element order of PSL2({q})")]
    NotAnElementOrder { q: u64, n: u64 },
    #[error("q = {q} is outside the range covered by this result (need {need})")]
    UnsupportedQ { q: u64, need: &'static str },
    #[error("group of order {order} exceeds the enumeration budget {budget}")]
    BudgetExceeded { order: u64, budget: u64 },
    #[error("subgroup of order {0} matches no known subgroup type")]
    UnclassifiedSubgroup(u64),
    #[error("construction defect: {0}")]
    Defect(String),
}

pub type Result<T> = std::result::Result<T, Error>;
