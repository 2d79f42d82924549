//! Error type shared by every module in the crate.

use thiserror::Error;

/// Everything that can go wrong in this crate, grouped by who is at fault.
///
/// `InvalidInput` and `MechanismContract` mean the caller handed us bad data;
/// `ResourceLimit` means an explicit search cap was hit before an answer was
/// found; `Internal` means one of the algorithm invariants failed and the
/// result cannot be trusted. The CLI maps these groups to distinct exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured node, branch or size cap was exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A user-supplied mechanism violated its contract.
    #[error("mechanism contract violated: {0}")]
    MechanismContract(String),

    /// An internal invariant did not hold. This is a bug, not user error.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for an `InvalidInput` error with a formatted message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Shorthand for an `Internal` error with a formatted message.
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Shorthand for a `ResourceLimit` error with a formatted message.
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }
}
