use thiserror::Error;

/// Errors raised by constructions and analyses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    /// A weight distribution needed a set point that the materialized window does not contain.
    #[error("window incomplete: {0}")]
    WindowIncomplete(String),
    #[error("insufficient window: {0}")]
    InsufficientWindow(String),
    #[error("continued fraction needs more terms: {0}")]
    NeedsMoreTerms(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("window budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
