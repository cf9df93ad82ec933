use thiserror::Error;

/// Errors shared by every pipeline stage.
#[derive(Debug, Error)]
pub enum Error {
    /// Temperature outside the representable wire range, with the offending
    /// detector index.
    #[error("detector {detector}: temperature {value} °C outside wire range [0, 63.75]")]
    TemperatureRange { detector: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("config error: {0}")]
    Config(String),

    /// Caller misuse (bad argument combination, empty input, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Numerical failure (non-PD covariance, singular system, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
