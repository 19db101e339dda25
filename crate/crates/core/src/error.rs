use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of bounds for {len} rows")]
    OutOfBounds { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot fit featurizer: {0}")]
    Fit(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("metric undefined: {0}")]
    Metric(String),
}
