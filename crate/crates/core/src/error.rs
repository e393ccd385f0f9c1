use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the optimizer, objectives and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("prefix length {prefix} exceeds archive length {len}")]
    PrefixOutOfRange { prefix: usize, len: usize },

    #[error("vector contains non-finite components")]
    NonFinite,

    #[error("stamp {stamp} does not exceed the latest stored stamp {latest}")]
    StaleStamp { stamp: u64, latest: u64 },

    #[error("explicit factor refused for n = {0} (limit 64)")]
    TooLarge(usize),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
