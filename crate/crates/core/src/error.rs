use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate basis element: {0}")]
    DegenerateElement(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("memory cap exceeded: {requested} amplitudes requested, cap is {cap}")]
    MemoryCap { requested: u128, cap: usize },

    #[error("unreachable peak: {0}")]
    Unreachable(String),

    #[error("uncontrollable component: {0}")]
    Uncontrollable(String),

    #[error("schedule does not match gate: {0}")]
    ScheduleMismatch(String),

    #[error("gate {index} failed to compile: {source}")]
    Gate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
