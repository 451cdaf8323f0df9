use thiserror::Error;

/// Errors produced by solver construction, validation and iteration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("interior violated: {0}")]
    InteriorViolated(String),

    #[error("conjugate gradient breakdown: p'Ap = {paq} at iteration {iteration}")]
    CgBreakdown { iteration: usize, paq: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("quasi-Newton update rejected: {0}")]
    DegenerateUpdate(String),

    #[error("callback evaluation failed: {0}")]
    Callback(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
