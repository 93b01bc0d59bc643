use thiserror::Error;

/// Failure reported by a black-box evaluator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("oracle returned a non-finite value for index {index}")]
    NonFinite { index: usize },
    #[error("oracle failed: {0}")]
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("constraint {index} is not strictly satisfied (value {value:e})")]
    StrictFeasibilityLost { index: usize, value: f64 },
    #[error("negative multiplier {value:e} at index {index}")]
    NegativeMultiplier { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("the objective must be known and linear; reformulate through the epigraph first")]
    ObjectiveNotLinear,
    #[error("dual ascent did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("warm start violates the certificate constraints (max residual {residual:e}, bound {bound:e})")]
    Sp2WarmStartInvalid { residual: f64, bound: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
