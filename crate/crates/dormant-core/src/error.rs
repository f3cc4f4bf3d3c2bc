//! Error types shared across the crate.
//!
//! Three failure classes matter to callers: bad input (rejected before any
//! computation), violated internal invariants (the math said "integer" and
//! the value was not one — always a bug or a misconfiguration worth a loud
//! stop), and insufficient oracle precision (retryable by widening).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The caller handed us something outside an operation's domain.
    #[error("input error: {0}")]
    Input(String),

    /// An internal exactness invariant failed (e.g. a coefficient that must
    /// be an integer reduced to a proper fraction). Never caused by input
    /// alone; indicates a bug.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// The interval oracle could not certify the value at the requested
    /// precision. Retry with more bits.
    #[error("insufficient precision: {0}")]
    Precision(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
