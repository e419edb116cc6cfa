//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by ensemble construction, information measures, the
/// trajectory engine, and the batch runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ensemble must contain at least one state")]
    EmptyEnsemble,

    #[error("priors sum to {sum:.17}, expected 1 within {tol:e}")]
    UnnormalizedPriors { sum: f64, tol: f64 },

    #[error("prior {value} at index {index} is negative or not finite")]
    InvalidPrior { index: usize, value: f64 },

    #[error("amplitude at index {index} is not finite")]
    NonFiniteAmplitude { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mean photon number must be non-negative, got {0}")]
    NegativePhotonNumber(f64),

    #[error(
        "Fock truncation at n_max = {n_max} keeps squared norm {norm} of state {index}; \
         need at least 1 - 1e-8"
    )]
    TruncationLoss {
        index: usize,
        n_max: usize,
        norm: f64,
    },

    #[error("density matrix eigenvalue {0} is below -1e-9")]
    NegativeEigenvalue(f64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("true-state index {index} out of range for {len}-state ensemble")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("|B| = {0} >= 1: squeezing parameter diverges")]
    SqueezingDiverged(f64),

    #[error("batch statistics failed sanity bounds: {0}")]
    StatisticsInvariant(String),

    #[error("ensemble file {path}: {message}")]
    EnsembleFile { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
