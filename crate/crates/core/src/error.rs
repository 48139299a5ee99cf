use std::path::PathBuf;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("waypoint {index} unreachable: no progress for {horizon_s} s (residual error {residual:.3e})")]
    UnreachableWaypoint {
        index: usize,
        horizon_s: f64,
        residual: f64,
    },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid interface spec: {0}")]
    InvalidInterface(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("segmentation produced no segment of at least {epsilon} samples")]
    EmptyResult { epsilon: usize },

    #[error("segment has {len} point(s); at least 2 are required")]
    DegenerateSegment { len: usize },

    #[error("segments command overlapping dimensions {0}")]
    OverlapError(String),

    #[error("cannot merge a constrained segment ({0})")]
    ConstraintViolation(&'static str),

    #[error("cutoff {cutoff_hz} Hz must lie in (0, {nyquist_hz}) Hz; order must be >= 1")]
    InvalidCutoff { cutoff_hz: f64, nyquist_hz: f64 },

    #[error("invalid Savitzky-Golay window {window} for polynomial order {polyorder}")]
    InvalidWindow { window: usize, polyorder: usize },

    #[error("channel has {len} samples; at least {required} required")]
    TooShort { len: usize, required: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("unknown interface `{0}`")]
    UnknownInterface(String),

    #[error("unknown scene `{0}`")]
    UnknownScene(String),

    #[error("demonstration failed validation: {0}")]
    Invalid(ValidationReport),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
