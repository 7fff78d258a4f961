use thiserror::Error;

/// Error type shared by every module in this crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("division by zero in field arithmetic")]
    DivideByZero,

    /// An operation mixed objects built over different geometries.
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    /// A search that was expected to succeed proved the opposite instead.
    #[error("counterexample found: {0}")]
    CounterexampleFound(String),

    /// A cache file or other persisted artifact failed its consistency checks.
    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
