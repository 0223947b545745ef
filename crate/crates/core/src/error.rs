use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("location {location} is not within half a step of the grid (step {step})")]
    SnapMisaligned { location: f64, step: f64 },

    #[error("history underflow: lag of {lag} steps at index {index} exceeds the {available} stored history nodes")]
    HistoryUnderflow {
        lag: usize,
        index: usize,
        available: usize,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("length mismatch for {what}: need at least {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few paths: {found} supplied, at least {required} required")]
    TooFewPaths { found: usize, required: usize },

    #[error("window spacing violation at index {index}: spacing {spacing} outside [{min}, {max}]")]
    SpacingViolation {
        index: usize,
        spacing: f64,
        min: f64,
        max: f64,
    },

    #[error("negative sample {value} at t = {t}")]
    NegativeSample { t: f64, value: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("unknown corpus function `{0}`")]
    UnknownFunction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numeric failures, as opposed to invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::HistoryUnderflow { .. } | Error::NonFinite(_)
        )
    }
}
