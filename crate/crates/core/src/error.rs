use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate mode at k = {k}: gap {gap:e} below tolerance")]
    DegenerateMode { k: f64, gap: f64 },

    #[error("norm drift {drift:e} exceeds {limit:e} (step too coarse)")]
    NormDrift { drift: f64, limit: f64 },

    #[error("unitarity drift {drift:e} exceeds {limit:e}")]
    UnitarityDrift { drift: f64, limit: f64 },

    #[error("subchain length {l} exceeds the allowed maximum {max}")]
    SubchainTooLong { l: usize, max: usize },

    #[error("malformed correlation matrix: {0}")]
    MalformedCorrelation(String),

    #[error("argument {0} outside [-1, 1]")]
    OutOfDomain(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 config, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) | Error::SubchainTooLong { .. } => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
