use thiserror::Error;

/// Errors raised by the estimators and their building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain where the operation is defined.
    #[error("invalid {name}: {reason}")]
    Domain { name: &'static str, reason: String },

    /// Two inputs that must agree in length or dimension do not.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// The implicit boundary root finder ran out of iterations.
    #[error("root finder failed after {iterations} iterations, last bracket [{lo}, {hi}]")]
    SolverFailure { lo: f64, hi: f64, iterations: usize },

    /// The reference quadrature did not reach its tolerance.
    #[error("reference quadrature did not converge: error estimate {estimate:e} after {intervals} intervals")]
    OracleFailure { estimate: f64, intervals: usize },

    /// The estimator cannot handle this target (the plain estimators cannot
    /// evaluate a Dirac integrand).
    #[error("target {0} is not supported by this estimator")]
    UnsupportedTarget(&'static str),

    /// Generating vector cache file could not be read or written.
    #[error("generating vector cache {path}: {reason}")]
    Cache { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
