use thiserror::Error;

/// Errors produced by graph ingestion, walk evolution, divergence and matching.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("index {index} out of range for graph with {len} nodes")]
    Index { index: usize, len: usize },

    #[error("attribute error: {0}")]
    Attribute(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed input text rather than bad values.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
