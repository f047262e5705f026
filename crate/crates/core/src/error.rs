use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,
    #[error("corpus has no documents")]
    EmptyData,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("anchor words not in vocabulary: {}", .0.join(", "))]
    UnknownAnchorWords(Vec<String>),
    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),
    #[error("non-finite objective at iteration {iteration} (restart {restart})")]
    NumericalFailure { restart: usize, iteration: usize },
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model file parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
