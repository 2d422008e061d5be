use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point budget exceeded: {requested} points requested, budget is {budget}")]
    SizeExceeded { requested: usize, budget: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("field was built on a different space")]
    SpaceMismatch,

    #[error("norm is unbounded: {0}")]
    UnboundedNorm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
