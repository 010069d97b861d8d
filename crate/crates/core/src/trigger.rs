//! Threshold comparison turning session metrics into struggle indicators.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::metrics::GazeMetrics;

/// Which side of the saccade threshold counts as struggling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaccadeDirection {
    /// Saccades shorter than the threshold (novice-like, linear reading).
    #[default]
    Below,
    Above,
}

/// Reference levels above which (below, for saccades) a metric signals
/// difficulty. Defaults are novice means from prior eye-tracking work on
/// program comprehension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub fixation_duration_ms: f64,
    pub fixation_count_per_s: f64,
    pub saccade_length_px: f64,
    pub pupil_dilation_mm: f64,
    pub saccade_trigger_direction: SaccadeDirection,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            fixation_duration_ms: 241.31,
            fixation_count_per_s: 2.89,
            saccade_length_px: 132.74,
            pupil_dilation_mm: 0.1,
            saccade_trigger_direction: SaccadeDirection::Below,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("fixation_duration_ms", self.fixation_duration_ms),
            ("fixation_count_per_s", self.fixation_count_per_s),
            ("saccade_length_px", self.saccade_length_px),
            ("pupil_dilation_mm", self.pupil_dilation_mm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Thresholds(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TriggerFlags {
    pub long_fixation_duration: bool,
    pub high_fixation_count: bool,
    pub short_saccades: bool,
    pub high_pupil_dilation: bool,
}

impl TriggerFlags {
    pub const ALL: TriggerFlags = TriggerFlags {
        long_fixation_duration: true,
        high_fixation_count: true,
        short_saccades: true,
        high_pupil_dilation: true,
    };

    /// Flags in canonical order: duration, count, saccade, pupil.
    pub fn as_array(&self) -> [bool; 4] {
        [
            self.long_fixation_duration,
            self.high_fixation_count,
            self.short_saccades,
            self.high_pupil_dilation,
        ]
    }

    pub fn from_array(flags: [bool; 4]) -> Self {
        Self {
            long_fixation_duration: flags[0],
            high_fixation_count: flags[1],
            short_saccades: flags[2],
            high_pupil_dilation: flags[3],
        }
    }

    /// Bit i set when the i-th canonical flag is set.
    pub fn from_bits(bits: u8) -> Self {
        Self::from_array(std::array::from_fn(|i| bits & (1 << i) != 0))
    }

    pub fn count(&self) -> usize {
        self.as_array().iter().filter(|f| **f).count()
    }

    pub fn any(&self) -> bool {
        self.count() > 0
    }
}

/// Strict comparisons: a metric equal to its threshold does not trigger.
/// Absent metrics never trigger.
pub fn evaluate_thresholds(metrics: &GazeMetrics, config: &ThresholdConfig) -> TriggerFlags {
    let above = |v: Option<f64>, t: f64| v.is_some_and(|v| v > t);
    let below = |v: Option<f64>, t: f64| v.is_some_and(|v| v < t);
    TriggerFlags {
        long_fixation_duration: above(metrics.mean_fixation_duration_ms, config.fixation_duration_ms),
        high_fixation_count: above(metrics.fixation_count_per_s, config.fixation_count_per_s),
        short_saccades: match config.saccade_trigger_direction {
            SaccadeDirection::Below => below(metrics.mean_saccade_length_px, config.saccade_length_px),
            SaccadeDirection::Above => above(metrics.mean_saccade_length_px, config.saccade_length_px),
        },
        high_pupil_dilation: above(metrics.mean_pupil_dilation_mm, config.pupil_dilation_mm),
    }
}
