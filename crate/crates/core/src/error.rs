use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("element is not bound to this group")]
    GroupMismatch,

    #[error("no supported (p, s) weight for prime {p}; theta component is undefined")]
    UndefinedComponent { p: u64 },

    #[error("{what} has size {size}, above the enumeration cap {cap}")]
    CapExceeded { what: String, size: u128, cap: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
