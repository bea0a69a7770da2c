use thiserror::Error;

/// Errors produced across the geometry engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension {0} not supported (need {1})")]
    UnsupportedDimension(usize, &'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error("origin not interior: support value {0:e} at a sample direction")]
    OriginNotInterior(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("bodies sampled on different grids")]
    GridMismatch,

    #[error("measure fails Minkowski conditions: {0}")]
    InvalidMeasure(String),

    #[error("solver did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("operator rejected: {0}")]
    OperatorRejected(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GeomError {
    fn from(e: serde_json::Error) -> Self {
        GeomError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
