use thiserror::Error;

use crate::lattice::Site;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("site {0} is not in the volume")]
    SiteOutside(Site),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (supported: 1, 2, 3)")]
    UnsupportedDimension(usize),

    #[error("operation requires d = {required}, got d = {got}")]
    RequiresDimension { required: usize, got: usize },

    #[error("negative height {height} at index {index}")]
    NegativeHeight { index: usize, height: i64 },

    #[error("configuration is not stable")]
    Unstable,

    #[error("exact solve refused: {sites} sites exceeds the cap of {cap}")]
    ExactCapExceeded { sites: usize, cap: usize },

    #[error("invalid sampler parameters: {0}")]
    InvalidSampler(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("iteration cap of {0} reached")]
    IterationCap(u64),

    #[error("{0}")]
    Usage(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
