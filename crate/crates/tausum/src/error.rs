//! Crate-wide error type.
//!
//! Errors are classified by what the caller can do about them: fix the
//! arguments ([`Error::Domain`]), raise a cap ([`Error::Cap`]), or relax a
//! precision target ([`Error::Precision`]). Verification outcomes (an
//! identity failing to hold) are never errors — they are reported as data by
//! the functions that check them.

use thiserror::Error;

/// Alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Arguments outside an operation's documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested work or memory beyond a configured cap.
    #[error("resource cap exceeded: {what} = {requested} > {cap}")]
    Cap {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    /// A precision target the given budget cannot certify.
    #[error("precision target of {requested} digits not met (achieved ≈ {achieved:.1})")]
    Precision { requested: u32, achieved: f64 },
}

impl Error {
    /// Convenience constructor for domain violations.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
