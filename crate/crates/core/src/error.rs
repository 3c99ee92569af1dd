use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("retry budget exceeded after {attempts} pairing attempts (n={n}, d={d})")]
    RetryBudgetExceeded { n: usize, d: usize, attempts: usize },

    #[error("vertex {v} out of range for graph with {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },

    #[error("edge mask has length {got}, expected {expected}")]
    MaskLengthMismatch { got: usize, expected: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix size {n} exceeds dense solver limit {limit}")]
    SizeExceeded { n: usize, limit: usize },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("vector violates simplex constraint: {0}")]
    SimplexViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
