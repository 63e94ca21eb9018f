use thiserror::Error;

/// Errors raised by the library layer.
///
/// The variants map one-to-one onto the CLI exit codes: argument and shape
/// problems are caller mistakes, capacity errors mean the instance is too
/// large for exact dense computation, domain errors mean the mathematical
/// object does not exist (e.g. a reducible chain has no unique stationary law).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: String,
        requested: u128,
        limit: u128,
    },
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(what: impl Into<String>, requested: u128, limit: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            requested,
            limit,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
