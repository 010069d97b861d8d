//! Gaze analytics for gaze-informed refactoring prompts.
//!
//! The pipeline runs from raw tracker samples ([`sample`], [`format`],
//! [`replay`], [`synth`]) through fixation detection ([`fixation`]) and session
//! metrics ([`metrics`]) to threshold flags ([`trigger`]) and prompt text
//! ([`prompt`]). [`codemap`] places gaze on the editor's character grid.

pub mod codemap;
pub mod error;
pub mod fixation;
pub mod format;
pub mod metrics;
pub mod prompt;
pub mod replay;
pub mod sample;
pub mod synth;
pub mod trigger;

pub use codemap::{line_summaries, map_gaze, map_pixel, CodeLocation, EditorGeometry, LineGazeSummary};
pub use error::{ConfigError, Location, MetricsError, RecordingError};
pub use fixation::{
    detect_fixations, fixation_durations_ms, Fixation, FixationConfig, FixationTracker, ValidityPolicy,
};
pub use format::{read_recording, write_recording, RecordingFormat};
pub use metrics::{analyze, compute_metrics, metrics_snapshot, pupil_baseline, GazeMetrics, SessionWindow};
pub use prompt::{prompt_for_session, synthesize_prompt, InteractionMode, PromptMode, PromptText};
pub use replay::{replay, ReplayError, SampleSink};
pub use sample::{GazeRecording, GazeSample, RecordingHeader};
pub use synth::{synth_trace, PlannedDwell, ProfileKind, ScanpathProfile, SyntheticTrace};
pub use trigger::{evaluate_thresholds, SaccadeDirection, ThresholdConfig, TriggerFlags};
