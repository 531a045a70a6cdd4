use alloc::string::String;

/// Errors produced by code construction, detection and enumeration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficients violate the Alamouti normalization |a|^2 = |b|^2, |a|^2 + |b|^2 = 1")]
    NormalizationViolated,
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    UnitarityViolated { deviation: f64 },
    #[error("rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("work of {required} exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("code is not fast-decodable (k' = 0)")]
    NotFastDecodable,
    #[error("code does not have the required structure: {0}")]
    WrongStructure(String),
    #[error("difference vector is zero")]
    ZeroDifference,
    #[error("degenerate code: {0}")]
    Degenerate(String),
    #[error("unknown code name `{0}`")]
    UnknownCode(String),
    #[error("unsupported constellation size {0}")]
    UnsupportedConstellation(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
