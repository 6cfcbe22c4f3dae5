use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid order data: {0}")]
    InvalidOrder(String),

    #[error("element has non-integral coordinates")]
    NotIntegral,

    #[error("form is not positive definite (pivot {index} = {pivot})")]
    NotPositiveDefinite { index: usize, pivot: String },

    #[error("group closure exceeded cap of {cap} elements")]
    GroupCapExceeded { cap: usize },

    #[error("no closed-form reduced norm for this order")]
    NoReducedNorm,

    #[error("prime search exhausted after {tried} candidates")]
    PrimeSearchExhausted { tried: u64 },

    #[error("prime {p} does not satisfy the split criterion: {reason}")]
    NotSplit { p: u64, reason: String },

    #[error("reduction map check failed: {0}")]
    ReductionFailure(String),

    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("enumeration cap of {cap} exceeded")]
    EnumerationCap { cap: usize },

    #[error("dimension {dim} exceeds the exact SVP cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("family constraint violated: {0}")]
    FamilyConstraint(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
