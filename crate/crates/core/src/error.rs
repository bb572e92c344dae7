use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "cross-derivative term breaks lower-boundedness: E_CSigma*(dC_J/C_J)^2 = {coupling:.3e} >= E_CJ = {e_cj:.3e}"
    )]
    UnboundedOperator { coupling: f64, e_cj: f64 },

    #[error("shifted operator is not positive definite at pivot {pivot} (shift {shift:.3e})")]
    NotPositiveDefinite { pivot: usize, shift: f64 },

    #[error("eigensolver did not converge after {iterations} restarts; residuals {residuals:?}")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("energy ordering violated: E1 - E0 = {0:.3e} is not positive")]
    OrderingViolation(f64),

    #[error("need at least {needed} levels, have {have}")]
    TooFewLevels { needed: usize, have: usize },

    #[error("level {level} out of range (k = {k})")]
    LevelOutOfRange { level: usize, k: usize },

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("all {0} scan points failed")]
    AllPointsFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
