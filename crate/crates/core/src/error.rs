use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Where in a recording a problem was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Zero-based index into an in-memory sample sequence.
    Index(usize),
    /// One-based line number in a recording file.
    Line(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Index(i) => write!(f, "sample {i}"),
            Location::Line(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum RecordingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed recording at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing header field `{0}`")]
    MissingHeaderField(&'static str),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("invalid {at}: {reason}")]
    InvalidSample { at: Location, reason: String },
    #[error("timestamps go backwards at {at}: {timestamp_us} µs after {previous_us} µs")]
    NonMonotonic {
        at: Location,
        previous_us: u64,
        timestamp_us: u64,
    },
}

impl RecordingError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RecordingError::Io {
            path: path.into(),
            source,
        }
    }

    /// Rewrites an index-based location into a file line number.
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            RecordingError::InvalidSample { reason, .. } => RecordingError::InvalidSample {
                at: Location::Line(line),
                reason,
            },
            RecordingError::NonMonotonic {
                previous_us,
                timestamp_us,
                ..
            } => RecordingError::NonMonotonic {
                at: Location::Line(line),
                previous_us,
                timestamp_us,
            },
            other => other,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("insufficient data: at least 2 samples are required, got {0}")]
    InsufficientData(usize),
    #[error("baseline unavailable: the recording has no valid pupil data")]
    BaselineUnavailable,
    #[error("invalid baseline {0} mm: must be finite and positive")]
    InvalidBaseline(f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid fixation config: {0}")]
    Fixation(String),
    #[error("invalid thresholds: {0}")]
    Thresholds(String),
    #[error("invalid scanpath profile: {0}")]
    Profile(String),
    #[error("duration must be positive, got {0} ms")]
    Duration(f64),
}
