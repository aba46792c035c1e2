use thiserror::Error;

/// Errors raised by the algebra engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("group contexts differ: (p={0}, n={1}) vs (p={2}, n={3})")]
    ContextMismatch(u32, u32, u32, u32),

    #[error("precondition violated: {what}; residual normal form: {residual}")]
    Precondition { what: String, residual: String },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
