use thiserror::Error;

/// Errors raised by the library.
///
/// `Domain` covers bad arguments (out-of-range indices, points off a segment,
/// mismatched domains). `Structural` is reserved for meshes whose topology
/// cannot be interpreted. `Contract` is raised when a user-supplied integrand
/// or test function breaks its declared contract during evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("generator error: {0}")]
    Generator(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
