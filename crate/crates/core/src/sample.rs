//! Gaze data model: individual tracker readings and whole recordings.

use serde::{Deserialize, Serialize};

use crate::error::{Location, RecordingError};

/// Default screen width the normalized coordinates are scaled against.
pub const DEFAULT_SCREEN_WIDTH_PX: u32 = 1920;
pub const DEFAULT_SCREEN_HEIGHT_PX: u32 = 1080;
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 60.0;

/// One timestamped binocular tracker reading.
///
/// Coordinates are normalized to the screen (`0.0..=1.0` when on screen).
/// Timestamps are microseconds relative to the start of the session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub timestamp_us: u64,
    pub gaze_x: f64,
    pub gaze_y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pupil_left_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pupil_right_mm: Option<f64>,
    pub valid_left: bool,
    pub valid_right: bool,
}

impl GazeSample {
    /// A sample with both eyes valid and the same pupil diameter on each side.
    pub fn binocular(timestamp_us: u64, gaze_x: f64, gaze_y: f64, pupil_mm: f64) -> Self {
        Self {
            timestamp_us,
            gaze_x,
            gaze_y,
            pupil_left_mm: Some(pupil_mm),
            pupil_right_mm: Some(pupil_mm),
            valid_left: true,
            valid_right: true,
        }
    }

    /// A sample where the tracker lost both eyes (blink, look-away).
    pub fn lost(timestamp_us: u64) -> Self {
        Self {
            timestamp_us,
            gaze_x: 0.0,
            gaze_y: 0.0,
            pupil_left_mm: None,
            pupil_right_mm: None,
            valid_left: false,
            valid_right: false,
        }
    }

    /// True when at least one eye produced a usable reading.
    pub fn is_valid(&self) -> bool {
        self.valid_left || self.valid_right
    }

    /// Mean pupil diameter over the valid eyes, if any.
    pub fn pupil_mm(&self) -> Option<f64> {
        let left = self.pupil_left_mm.filter(|_| self.valid_left);
        let right = self.pupil_right_mm.filter(|_| self.valid_right);
        match (left, right) {
            (Some(l), Some(r)) => Some((l + r) / 2.0),
            (Some(p), None) | (None, Some(p)) => Some(p),
            (None, None) => None,
        }
    }

    /// Checks the per-sample invariants, returning a human-readable reason on failure.
    pub fn check(&self) -> Result<(), String> {
        if !self.gaze_x.is_finite() || !self.gaze_y.is_finite() {
            return Err("gaze coordinates must be finite".into());
        }
        for (side, valid, pupil) in [
            ("left", self.valid_left, self.pupil_left_mm),
            ("right", self.valid_right, self.pupil_right_mm),
        ] {
            if let Some(p) = pupil {
                if !p.is_finite() {
                    return Err(format!("{side} pupil diameter must be finite"));
                }
            }
            if valid {
                match pupil {
                    Some(p) if p > 0.0 => {}
                    _ => return Err(format!("{side} eye is marked valid but has no positive pupil diameter")),
                }
            }
        }
        Ok(())
    }
}

/// Session-level metadata carried by the first line of a recording file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingHeader {
    pub session_id: String,
    pub screen_width_px: u32,
    pub screen_height_px: u32,
    pub sample_rate_hz: f64,
}

impl Default for RecordingHeader {
    fn default() -> Self {
        Self {
            session_id: String::new(),
            screen_width_px: DEFAULT_SCREEN_WIDTH_PX,
            screen_height_px: DEFAULT_SCREEN_HEIGHT_PX,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }
}

impl RecordingHeader {
    pub fn check(&self) -> Result<(), RecordingError> {
        if self.screen_width_px == 0 || self.screen_height_px == 0 {
            return Err(RecordingError::InvalidHeader(
                "screen dimensions must be positive".into(),
            ));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(RecordingError::InvalidHeader("sample rate must be positive".into()));
        }
        Ok(())
    }
}

/// An ordered, validated sequence of gaze samples plus screen metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeRecording {
    pub session_id: String,
    pub screen_width_px: u32,
    pub screen_height_px: u32,
    pub sample_rate_hz: f64,
    pub samples: Vec<GazeSample>,
}

impl GazeRecording {
    pub fn new(header: RecordingHeader, samples: Vec<GazeSample>) -> Result<Self, RecordingError> {
        header.check()?;
        check_samples(&samples, None)?;
        Ok(Self::from_parts_unchecked(header, samples))
    }

    /// Empty recording with the given header.
    pub fn empty(header: RecordingHeader) -> Result<Self, RecordingError> {
        Self::new(header, Vec::new())
    }

    pub(crate) fn from_parts_unchecked(header: RecordingHeader, samples: Vec<GazeSample>) -> Self {
        Self {
            session_id: header.session_id,
            screen_width_px: header.screen_width_px,
            screen_height_px: header.screen_height_px,
            sample_rate_hz: header.sample_rate_hz,
            samples,
        }
    }

    pub fn header(&self) -> RecordingHeader {
        RecordingHeader {
            session_id: self.session_id.clone(),
            screen_width_px: self.screen_width_px,
            screen_height_px: self.screen_height_px,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Re-checks every invariant. Useful after mutating `samples` directly.
    pub fn validate(&self) -> Result<(), RecordingError> {
        self.header().check()?;
        check_samples(&self.samples, None)
    }

    /// A recording holding only the samples with `timestamp_us <= until_us`.
    pub fn prefix_until(&self, until_us: u64) -> Self {
        let end = self.samples.partition_point(|s| s.timestamp_us <= until_us);
        self.prefix_len(end)
    }

    /// A recording holding the first `len` samples.
    pub fn prefix_len(&self, len: usize) -> Self {
        Self::from_parts_unchecked(self.header(), self.samples[..len.min(self.samples.len())].to_vec())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_us(&self) -> u64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(first), Some(last)) => last.timestamp_us - first.timestamp_us,
            _ => 0,
        }
    }
}

/// Validates a run of samples, optionally continuing after `previous_us`.
///
/// Positions in errors are zero-based indices into `samples`.
pub fn check_samples(samples: &[GazeSample], previous_us: Option<u64>) -> Result<(), RecordingError> {
    let mut last = previous_us;
    for (index, sample) in samples.iter().enumerate() {
        sample.check().map_err(|reason| RecordingError::InvalidSample {
            at: Location::Index(index),
            reason,
        })?;
        if let Some(prev) = last {
            if sample.timestamp_us < prev {
                return Err(RecordingError::NonMonotonic {
                    at: Location::Index(index),
                    previous_us: prev,
                    timestamp_us: sample.timestamp_us,
                });
            }
        }
        last = Some(sample.timestamp_us);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pupil_uses_valid_eyes_only() {
        let mut s = GazeSample::binocular(0, 0.5, 0.5, 3.0);
        s.pupil_right_mm = Some(4.0);
        assert_eq!(s.pupil_mm(), Some(3.5));
        s.valid_right = false;
        assert_eq!(s.pupil_mm(), Some(3.0));
        s.valid_left = false;
        assert_eq!(s.pupil_mm(), None);
        assert!(!s.is_valid());
    }

    #[test]
    fn valid_eye_requires_positive_pupil() {
        let mut s = GazeSample::binocular(0, 0.5, 0.5, 3.0);
        s.pupil_left_mm = None;
        assert!(s.check().is_err());
        s.pupil_left_mm = Some(0.0);
        assert!(s.check().is_err());
        s.valid_left = false;
        assert!(s.check().is_ok());
    }

    #[test]
    fn rejects_non_finite_gaze() {
        let mut s = GazeSample::lost(0);
        s.gaze_x = f64::NAN;
        assert!(s.check().is_err());
    }

    #[test]
    fn recording_rejects_decreasing_timestamps() {
        let samples = vec![GazeSample::lost(10), GazeSample::lost(5)];
        let err = GazeRecording::new(RecordingHeader::default(), samples).unwrap_err();
        assert!(matches!(
            err,
            RecordingError::NonMonotonic {
                at: Location::Index(1),
                ..
            }
        ));
    }

    #[test]
    fn equal_timestamps_are_allowed() {
        let samples = vec![GazeSample::lost(10), GazeSample::lost(10)];
        assert!(GazeRecording::new(RecordingHeader::default(), samples).is_ok());
    }

    #[test]
    fn header_rejects_zero_dimensions() {
        let header = RecordingHeader {
            screen_width_px: 0,
            ..RecordingHeader::default()
        };
        assert!(header.check().is_err());
        let header = RecordingHeader {
            sample_rate_hz: 0.0,
            ..RecordingHeader::default()
        };
        assert!(header.check().is_err());
    }

    #[test]
    fn prefix_until_is_inclusive() {
        let samples = (0..5).map(|i| GazeSample::lost(i * 100)).collect();
        let rec = GazeRecording::new(RecordingHeader::default(), samples).unwrap();
        assert_eq!(rec.prefix_until(200).len(), 3);
        assert_eq!(rec.prefix_until(10_000).len(), 5);
        assert_eq!(rec.duration_us(), 400);
    }
}
