//! Session gaze metrics: mean fixation duration, fixation rate, mean saccade
//! length and mean pupil dilation relative to an opening baseline.
//!
//! Saccade lengths are taken between consecutive raw samples in normalized
//! coordinates and scaled by the screen width (both axes). Pairs involving an
//! invalid sample are skipped. Pupil values are per-sample means over the
//! valid eyes.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::fixation::{Fixation, FixationConfig, FixationTracker};
use crate::sample::{GazeRecording, GazeSample};

/// Length of the opening window the pupil baseline is averaged over.
pub const BASELINE_WINDOW_US: u64 = 60_000;
/// Valid pupil samples used when the opening window holds none.
pub const BASELINE_FALLBACK_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeMetrics {
    pub mean_fixation_duration_ms: Option<f64>,
    pub fixation_count_per_s: Option<f64>,
    pub mean_saccade_length_px: Option<f64>,
    pub mean_pupil_dilation_mm: Option<f64>,
    /// Number of fixations.
    pub n_fixations: usize,
    /// Number of samples with a valid pupil reading.
    pub n_pupil_samples: usize,
    /// Number of consecutive valid sample pairs the saccade mean runs over.
    pub n_saccades: usize,
    pub baseline_pupil_mm: Option<f64>,
    pub total_time_ms: f64,
}

/// Incremental pupil baseline: mean of the opening window, or of the first few
/// valid samples when the window has none.
#[derive(Debug, Clone, Default)]
struct BaselineState {
    origin_us: Option<u64>,
    window: Vec<f64>,
    window_closed: bool,
    early: Vec<f64>,
}

impl BaselineState {
    fn push(&mut self, sample: &GazeSample) {
        let origin = *self.origin_us.get_or_insert(sample.timestamp_us);
        let in_window = sample.timestamp_us - origin < BASELINE_WINDOW_US;
        if !in_window {
            self.window_closed = true;
        }
        if let Some(p) = sample.pupil_mm() {
            if in_window {
                self.window.push(p);
            }
            if self.early.len() < BASELINE_FALLBACK_SAMPLES {
                self.early.push(p);
            }
        }
    }

    fn value(&self) -> Option<f64> {
        let values = if self.window.is_empty() {
            &self.early
        } else {
            &self.window
        };
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}

/// Pupil baseline of a recording.
pub fn pupil_baseline(recording: &GazeRecording) -> Result<f64, MetricsError> {
    let mut state = BaselineState::default();
    for s in &recording.samples {
        state.push(s);
        if state.window_closed && state.early.len() == BASELINE_FALLBACK_SAMPLES {
            break;
        }
    }
    state.value().ok_or(MetricsError::BaselineUnavailable)
}

/// Running sums over raw samples shared by the batch and streaming paths, so
/// both produce bit-identical metrics.
#[derive(Debug, Clone)]
pub struct SampleAccumulator {
    screen_width_px: f64,
    sample_count: usize,
    first_us: Option<u64>,
    last_us: u64,
    previous: Option<GazeSample>,
    saccade_sum: f64,
    saccade_pairs: usize,
    pupils: Vec<f64>,
    baseline: BaselineState,
}

impl SampleAccumulator {
    pub fn new(screen_width_px: u32) -> Self {
        Self {
            screen_width_px: screen_width_px as f64,
            sample_count: 0,
            first_us: None,
            last_us: 0,
            previous: None,
            saccade_sum: 0.0,
            saccade_pairs: 0,
            pupils: Vec::new(),
            baseline: BaselineState::default(),
        }
    }

    pub fn push(&mut self, sample: &GazeSample) {
        self.sample_count += 1;
        self.first_us.get_or_insert(sample.timestamp_us);
        self.last_us = sample.timestamp_us;
        if sample.is_valid() {
            if let Some(prev) = self.previous.filter(GazeSample::is_valid) {
                let dx = sample.gaze_x - prev.gaze_x;
                let dy = sample.gaze_y - prev.gaze_y;
                self.saccade_sum += (dx * dx + dy * dy).sqrt() * self.screen_width_px;
                self.saccade_pairs += 1;
            }
        }
        if let Some(p) = sample.pupil_mm() {
            self.pupils.push(p);
        }
        self.baseline.push(sample);
        self.previous = Some(*sample);
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn baseline(&self) -> Option<f64> {
        self.baseline.value()
    }

    /// Combines the sample sums with `fixations` into metrics, measuring pupil
    /// dilation against `baseline`.
    pub fn finish(&self, fixations: &[Fixation], baseline: Option<f64>) -> Result<GazeMetrics, MetricsError> {
        if self.sample_count < 2 {
            return Err(MetricsError::InsufficientData(self.sample_count));
        }
        if let Some(b) = baseline {
            if !(b.is_finite() && b > 0.0) {
                return Err(MetricsError::InvalidBaseline(b));
            }
        }
        let total_us = self.last_us - self.first_us.unwrap_or(0);
        let total_time_ms = total_us as f64 / 1000.0;
        let n = fixations.len();
        let (mean_fixation_duration_ms, fixation_count_per_s) = if n == 0 || total_us == 0 {
            (None, None)
        } else {
            let sum_us: u64 = fixations.iter().map(Fixation::duration_us).sum();
            (
                Some(sum_us as f64 / 1000.0 / n as f64),
                Some(n as f64 / (total_time_ms / 1000.0)),
            )
        };
        let mean_saccade_length_px = (self.saccade_pairs > 0).then(|| self.saccade_sum / self.saccade_pairs as f64);
        let mean_pupil_dilation_mm = match baseline {
            Some(b) if !self.pupils.is_empty() => {
                let sum: f64 = self.pupils.iter().map(|p| p - b).sum();
                Some(sum / self.pupils.len() as f64)
            }
            _ => None,
        };
        Ok(GazeMetrics {
            mean_fixation_duration_ms,
            fixation_count_per_s,
            mean_saccade_length_px,
            mean_pupil_dilation_mm,
            n_fixations: n,
            n_pupil_samples: self.pupils.len(),
            n_saccades: self.saccade_pairs,
            baseline_pupil_mm: baseline,
            total_time_ms,
        })
    }
}

/// Computes the four metrics for `recording` given its fixations and a pupil
/// baseline (absent when the recording has no valid pupil data).
pub fn compute_metrics(
    recording: &GazeRecording,
    fixations: &[Fixation],
    baseline: Option<f64>,
) -> Result<GazeMetrics, MetricsError> {
    let mut acc = SampleAccumulator::new(recording.screen_width_px);
    for s in &recording.samples {
        acc.push(s);
    }
    acc.finish(fixations, baseline)
}

/// Baseline, fixation detection and metrics in one call.
pub fn analyze(recording: &GazeRecording, config: &FixationConfig) -> Result<GazeMetrics, MetricsError> {
    let baseline = match pupil_baseline(recording) {
        Ok(b) => Some(b),
        Err(MetricsError::BaselineUnavailable) => None,
        Err(e) => return Err(e),
    };
    let fixations = crate::fixation::detect_fixations(recording, config);
    compute_metrics(recording, &fixations, baseline)
}

/// Cumulative metrics over a growing session stream.
///
/// [`SessionWindow::snapshot`] equals [`analyze`] applied to the samples pushed
/// so far, taken as a standalone recording.
#[derive(Debug, Clone)]
pub struct SessionWindow {
    accumulator: SampleAccumulator,
    fixations: FixationTracker,
    last_us: Option<u64>,
}

impl SessionWindow {
    pub fn new(config: FixationConfig, screen_width_px: u32, screen_height_px: u32) -> Self {
        Self {
            accumulator: SampleAccumulator::new(screen_width_px),
            fixations: FixationTracker::new(config, screen_width_px, screen_height_px),
            last_us: None,
        }
    }

    /// Appends one sample. Callers must keep timestamps nondecreasing.
    pub fn push(&mut self, sample: &GazeSample) {
        debug_assert!(self.last_us.is_none_or(|t| t <= sample.timestamp_us));
        self.accumulator.push(sample);
        self.fixations.push(sample);
        self.last_us = Some(sample.timestamp_us);
    }

    pub fn extend<'a>(&mut self, samples: impl IntoIterator<Item = &'a GazeSample>) {
        for s in samples {
            self.push(s);
        }
    }

    pub fn last_timestamp_us(&self) -> Option<u64> {
        self.last_us
    }

    pub fn sample_count(&self) -> usize {
        self.accumulator.sample_count()
    }

    pub fn fixations(&self) -> Vec<Fixation> {
        self.fixations.fixations()
    }

    pub fn snapshot(&self) -> Result<GazeMetrics, MetricsError> {
        self.accumulator
            .finish(&self.fixations.fixations(), self.accumulator.baseline())
    }
}

/// Metrics of the prefix of `recording` up to and including `until_us`.
pub fn metrics_snapshot(
    recording: &GazeRecording,
    until_us: u64,
    config: &FixationConfig,
) -> Result<GazeMetrics, MetricsError> {
    let mut window = SessionWindow::new(config.clone(), recording.screen_width_px, recording.screen_height_px);
    window.extend(recording.samples.iter().take_while(|s| s.timestamp_us <= until_us));
    window.snapshot()
}
