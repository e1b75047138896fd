use thiserror::Error;

/// Errors raised by the library. Every variant maps onto one CLI exit code.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("operation undefined on the zero polynomial")]
    UndefinedOnZero,

    #[error("unknown index {0}")]
    UnknownIndex(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("validation failure: {0}")]
    ValidationFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
