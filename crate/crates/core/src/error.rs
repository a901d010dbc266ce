use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not a permutation of 1..{len}: {reason}")]
    InvalidPermutation { len: usize, reason: String },

    #[error("floor formula still ambiguous at the {bits}-bit precision cap")]
    Indeterminate { bits: u32 },

    #[error("truncation m_max = {m_max} is too short; use m_max >= {minimum}")]
    TruncationTooShort { m_max: usize, minimum: usize },

    #[error("sample has zero variance")]
    DegenerateSample,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
