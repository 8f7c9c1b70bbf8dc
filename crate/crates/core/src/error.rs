use thiserror::Error;

#[derive(Debug, Error)]
pub enum WwError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),
    #[error("solver failure after {iterations} iterations (last relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Last iterate, flattened as the caller documents.
        dump: Vec<f64>,
    },
    #[error("insufficient decay data: {usable} usable points")]
    InsufficientDecayData { usable: usize },
    #[error("property violation: {0}")]
    PropertyViolation(String),
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("window violation: {0}")]
    WindowViolation(String),
    #[error("terminal time too small: tail estimate {tail:e} vs {reference:e}")]
    TmaxTooSmall { tail: f64, reference: f64 },
    #[error("non-finite value encountered at step {step}")]
    NonFinite { step: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, WwError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(WwError::InvalidArgument(msg.into()))
}
