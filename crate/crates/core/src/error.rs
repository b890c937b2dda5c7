use thiserror::Error;

/// Errors produced by the symbolic and numeric engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("z-exponent overflow: result degree exceeds {limit}")]
    ExponentOverflow { limit: u64 },

    #[error("word length {len} exceeds the cap of {max}")]
    WordTooLong { len: usize, max: usize },

    #[error("invalid word {0:?}: letters must be 0 or 1")]
    InvalidWord(String),

    #[error("expansion too large: about {estimated_terms} z-terms requested, limit {limit}")]
    TooLarge { estimated_terms: u64, limit: u64 },

    #[error("invalid family member: {0}")]
    InvalidFamily(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("kernel product did not converge after {factors_used} factors")]
    NotConverged { factors_used: usize },

    #[error("malformed polynomial: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
