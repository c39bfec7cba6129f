//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of geometry, field, kernel and harness operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A point fell outside the validity region of a chart.
    #[error("point {coords:?} is outside the domain of chart `{chart}`")]
    InvalidPoint { chart: String, coords: Vec<f64> },

    /// An integrated trajectory left the chart domain. Carries the last
    /// sample that was still valid and the parameter it was reached at.
    #[error("trajectory left the domain of chart `{chart}` near t={param}; last valid sample {last_valid:?}")]
    DomainExit {
        chart: String,
        param: f64,
        last_valid: Vec<f64>,
    },

    /// A point is too close to the chart boundary for a finite-difference
    /// stencil of the requested width.
    #[error("finite-difference stencil of width {step} around {coords:?} leaves the domain of chart `{chart}`")]
    StencilOutOfDomain {
        chart: String,
        coords: Vec<f64>,
        step: f64,
    },

    /// Coordinate or component vectors of inconsistent length.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Tensor ranks do not line up for the requested operation.
    #[error("tensor rank mismatch: expected {expected}, got {actual}")]
    RankMismatch { expected: String, actual: String },

    /// A matrix inversion, factorization or root search failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A `Path` violated its structural invariants.
    #[error("invalid path: {0}")]
    InvalidPath(String),

    /// A field was sampled outside its declared region.
    #[error("sample point {coords:?} is outside the field region")]
    OutOfRegion { coords: Vec<f64> },

    /// A chart transition was evaluated outside the overlap region.
    #[error("point {coords:?} is outside the overlap region of transition `{transition}`")]
    OutsideOverlap {
        transition: String,
        coords: Vec<f64>,
    },

    /// Bad argument to a library call (non-positive radius, unknown
    /// preset, malformed component list, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Harness configuration problems: unknown presets, missing sections,
    /// unreadable referenced files.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that indicate a misconfigured run rather than a
    /// failed numerical claim; the CLI maps these to exit code 2.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidArgument(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
