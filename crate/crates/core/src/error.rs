//! Error type shared by every stage of the compiler.

use thiserror::Error;

/// Errors raised while building, transforming or simulating polynomials and circuits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} exceeds the cap: {needed} > {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("polynomial degree {degree} exceeds the allowed {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("matrix has a zero row or column (strip it first)")]
    ZeroRowOrColumn,

    #[error("weights must be strictly positive")]
    NonPositiveWeight,

    #[error("scale violation: norm {norm} exceeds scale {scale}")]
    ScaleViolation { norm: f64, scale: f64 },

    #[error("approximation check failed: max error {max_error} > {epsilon}")]
    ApproximationFailed { max_error: f64, epsilon: f64 },

    #[error("form is not bounded on the cube: max |P| = {max_abs}")]
    Unbounded { max_abs: f64 },

    #[error("rationalization tolerance not met: best realized ratio {achieved} (tolerance {tolerance})")]
    ToleranceNotMet { achieved: f64, tolerance: f64 },

    #[error("achieved ratio {ratio} exceeds the target {target}")]
    RatioNotMet { ratio: f64, target: f64 },

    #[error("split size {needed} exceeds the budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
