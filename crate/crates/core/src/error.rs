use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("degree {degree} exceeds the configured maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("grids differ: {0}")]
    GridMismatch(String),
    #[error("frequency grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("Picard iteration did not contract: measured factor {factor:.4}")]
    NonContraction { factor: f64 },
    #[error("sub-horizon {tau:.3e} is below the time grid step {step:.3e}")]
    HorizonTooShort { tau: f64, step: f64 },
    #[error("Young level {level} exceeds the noise path resolution {max}")]
    LevelTooFine { level: i64, max: i64 },
    #[error("infeasible exponents: {0}")]
    Infeasible(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
