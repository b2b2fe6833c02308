use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the sampling library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("every importance weight is zero")]
    AllZeroWeights,
    #[error("non-finite importance weight at index {index}: {value}")]
    NonFiniteWeight { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("target `{0}` has no stored reference values")]
    NoReference(String),
    #[error("target position coincides with sensor {sensor}")]
    SingularGeometry { sensor: usize },
    #[error("matrix is not symmetric positive definite")]
    NonPositiveDefinite,
    #[error("proposal index (chain {chain}, iteration {iteration}) does not exist")]
    UnknownIndex { chain: usize, iteration: usize },
    #[error("partition does not cover proposal (chain {chain}, iteration {iteration}) exactly once")]
    PartitionNotCovering { chain: usize, iteration: usize },
    #[error("all inverse weights of the population are zero or non-finite")]
    DegenerateInverseWeights,
    #[error("every partial estimator has zero normalizing-constant estimate")]
    AllZeroPartials,
    #[error("history of {requested} stored samples exceeds the configured cap of {cap}")]
    MemoryCapExceeded { requested: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by bad user input rather than a failing run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::NonPositiveDefinite
                | Error::DimensionMismatch { .. }
                | Error::PartitionNotCovering { .. }
                | Error::MemoryCapExceeded { .. }
                | Error::NoReference(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
