use thiserror::Error;

/// Errors raised by the localization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range for {what} of size {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cannot generate connected network after {attempts} attempts")]
    DisconnectedNetwork { attempts: usize },

    #[error("measurement graph is not connected ({components} components)")]
    NotConnected { components: usize },

    #[error("measurement set has no edges")]
    EmptyEdgeList,

    #[error("unsupported problem structure: {0}")]
    Unsupported(String),

    #[error("solver failed: {0}")]
    SolverFailed(String),

    #[error("empty sample")]
    EmptySample,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
