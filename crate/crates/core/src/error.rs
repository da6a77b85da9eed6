use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value {value} outside the range [0, 1]")]
    OutOfRange { value: f64 },

    #[error("similarity is undefined for a zero-norm operand")]
    UndefinedSimilarity,

    #[error("correlation is undefined for a zero-variance input")]
    UndefinedCorrelation,

    #[error("key has a (near-)zero spectral component at frequency {frequency}")]
    SingularKey { frequency: usize },

    #[error("regularized Gram matrix is singular; use lambda > 0")]
    SingularSystem,

    #[error("insufficient data: {samples} samples cannot fill {agents} shards")]
    InsufficientData { samples: usize, agents: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("malformed compressed classifier: {0}")]
    Wire(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("seed {seed} failed: {source}")]
    SeedFailed {
        seed: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
