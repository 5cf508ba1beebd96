use thiserror::Error;

/// Failure modes shared across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("empty input")]
    EmptyInput,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("no convergence after {sweeps} sweeps (residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },
    #[error("insufficient data: need at least {needed} samples, have {have}")]
    InsufficientData { needed: u64, have: u64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
