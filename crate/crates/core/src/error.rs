use thiserror::Error;

/// Errors raised by tensor-train construction, factorization and sweeps.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("dense size {requested} exceeds cap {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("index set span mismatch: {0}")]
    Span(String),

    #[error("value {value} outside domain [{min}, {max})")]
    Domain { value: f64, min: f64, max: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("nesting violation: {0}")]
    Nesting(String),

    #[error("function expects {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("non-finite function value {value} at index {index:?}")]
    Evaluation { index: Vec<usize>, value: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("malformed tensor-train data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
