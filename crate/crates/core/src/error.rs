use thiserror::Error;

/// Errors raised across the lab.
#[derive(Debug, Error)]
pub enum LabError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or invalid configuration (grid too coarse, cutoff mismatch, bad key).
    #[error("configuration error: {0}")]
    Config(String),

    /// A coefficient became non-finite during time stepping.
    #[error("integration blowup at t = {time}: {detail}")]
    Blowup { time: f64, detail: String },

    /// Not enough samples for a statistic.
    #[error("insufficient samples: {0}")]
    Samples(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
