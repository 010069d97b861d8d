//! Dispersion-threshold (I-DT) fixation identification.
//!
//! A window starts at the earliest unconsumed point and is first stretched to
//! span `min_duration_ms`. If its dispersion `(max x - min x) + (max y - min y)`
//! in screen pixels exceeds `dispersion_max_px`, the window start slides by one
//! point. Otherwise the window grows until the next point would break the
//! dispersion bound, and the window is emitted as a fixation.
//!
//! The same state machine drives both the batch entry point
//! [`detect_fixations`] and the streaming [`FixationTracker`], so a tracker fed
//! any prefix of a recording reports exactly what the batch detector reports on
//! that prefix.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::sample::{GazeRecording, GazeSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub start_us: u64,
    pub end_us: u64,
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub sample_count: usize,
    pub mean_pupil_mm: Option<f64>,
}

impl Fixation {
    pub fn duration_us(&self) -> u64 {
        self.end_us - self.start_us
    }

    pub fn duration_ms(&self) -> f64 {
        self.duration_us() as f64 / 1000.0
    }
}

/// How samples with neither eye valid are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityPolicy {
    /// Invalid samples are skipped; a window may span them.
    DropInvalid,
    /// Runs of invalid samples spanning at most `max_gap_ms` (measured between
    /// the surrounding valid samples) are filled by linear interpolation of the
    /// coordinates. Longer runs end the current window.
    #[default]
    InterpolateShortGaps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixationConfig {
    pub dispersion_max_px: f64,
    pub min_duration_ms: f64,
    pub validity_policy: ValidityPolicy,
    pub max_gap_ms: f64,
}

impl Default for FixationConfig {
    fn default() -> Self {
        Self {
            dispersion_max_px: 35.0,
            min_duration_ms: 100.0,
            validity_policy: ValidityPolicy::InterpolateShortGaps,
            max_gap_ms: 75.0,
        }
    }
}

impl FixationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dispersion_max_px.is_finite() && self.dispersion_max_px > 0.0) {
            return Err(ConfigError::Fixation("dispersion_max_px must be positive".into()));
        }
        if !(self.min_duration_ms.is_finite() && self.min_duration_ms > 0.0) {
            return Err(ConfigError::Fixation("min_duration_ms must be positive".into()));
        }
        if !(self.max_gap_ms.is_finite() && self.max_gap_ms >= 0.0) {
            return Err(ConfigError::Fixation("max_gap_ms must be non-negative".into()));
        }
        Ok(())
    }

    fn min_duration_us(&self) -> f64 {
        self.min_duration_ms * 1000.0
    }
}

/// Member point of a candidate window, in both normalized and pixel space.
#[derive(Debug, Clone, Copy)]
struct Point {
    t: u64,
    x: f64,
    y: f64,
    px: f64,
    py: f64,
    pupil: Option<f64>,
    /// A tracking gap precedes this point; windows never span it.
    gap_before: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Bounds {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Bounds {
    fn of(p: &Point) -> Self {
        Self {
            min_x: p.px,
            max_x: p.px,
            min_y: p.py,
            max_y: p.py,
        }
    }

    fn with(mut self, p: &Point) -> Self {
        self.min_x = self.min_x.min(p.px);
        self.max_x = self.max_x.max(p.px);
        self.min_y = self.min_y.min(p.py);
        self.max_y = self.max_y.max(p.py);
        self
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

fn make_fixation(points: &[Point]) -> Fixation {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    let pupils: Vec<f64> = points.iter().filter_map(|p| p.pupil).collect();
    let mean_pupil_mm = if pupils.is_empty() {
        None
    } else {
        Some(pupils.iter().sum::<f64>() / pupils.len() as f64)
    };
    // Clamp keeps the centroid inside the member bounding box despite rounding.
    let (min_x, max_x) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.x), hi.max(p.x))
    });
    let (min_y, max_y) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.y), hi.max(p.y))
    });
    Fixation {
        start_us: points[0].t,
        end_us: points[points.len() - 1].t,
        centroid_x: (sx / n).clamp(min_x, max_x),
        centroid_y: (sy / n).clamp(min_y, max_y),
        sample_count: points.len(),
        mean_pupil_mm,
    }
}

/// A window that passed the minimum-duration check and is still growing.
#[derive(Debug, Clone, Copy)]
struct OpenWindow {
    end: usize,
    bounds: Bounds,
}

/// Outcome of running the window machine over the buffered points.
struct Scan {
    fixations: Vec<Fixation>,
    /// First point whose fate is still undecided.
    resume: usize,
    /// Growing window starting at `resume`, when the scan stopped mid-growth.
    open: Option<OpenWindow>,
}

/// Runs I-DT over `points[start..]`. When `at_end` is false, the scan stops as
/// soon as a decision would need a point that has not arrived yet. `open`
/// resumes a growing window that starts at `start`.
fn scan(points: &[Point], start: usize, mut open: Option<OpenWindow>, config: &FixationConfig, at_end: bool) -> Scan {
    let min_us = config.min_duration_us();
    let max_disp = config.dispersion_max_px;
    let mut fixations = Vec::new();
    let mut s = start;
    'outer: while s < points.len() {
        let (mut e, mut bounds) = match open.take() {
            Some(w) => (w.end, w.bounds),
            None => {
                // Stretch the window to the minimum duration.
                let mut bounds = Bounds::of(&points[s]);
                let mut e = s;
                loop {
                    let j = e + 1;
                    if j >= points.len() {
                        if at_end {
                            s = points.len();
                        }
                        break 'outer;
                    }
                    if points[j].gap_before {
                        s = j;
                        continue 'outer;
                    }
                    bounds = bounds.with(&points[j]);
                    e = j;
                    if (points[e].t - points[s].t) as f64 >= min_us {
                        break;
                    }
                }
                if bounds.dispersion() > max_disp {
                    s += 1;
                    continue;
                }
                (e, bounds)
            }
        };
        // Grow while the dispersion bound holds.
        loop {
            let j = e + 1;
            if j >= points.len() {
                if !at_end {
                    open = Some(OpenWindow { end: e, bounds });
                    break 'outer;
                }
                fixations.push(make_fixation(&points[s..=e]));
                s = j;
                break;
            }
            let grown = bounds.with(&points[j]);
            if points[j].gap_before || grown.dispersion() > max_disp {
                fixations.push(make_fixation(&points[s..=e]));
                s = j;
                break;
            }
            bounds = grown;
            e = j;
        }
    }
    Scan {
        fixations,
        resume: s,
        open,
    }
}

/// Streaming fixation detector for one session.
///
/// Samples are pushed in timestamp order; [`FixationTracker::fixations`]
/// returns the fixations of everything pushed so far, identical to running
/// [`detect_fixations`] on that prefix.
#[derive(Debug, Clone)]
pub struct FixationTracker {
    config: FixationConfig,
    screen_w: f64,
    screen_h: f64,
    committed: Vec<Fixation>,
    /// Points not yet consumed by a committed decision.
    points: Vec<Point>,
    last_valid: Option<Point>,
    /// Invalid samples after `last_valid` awaiting a resolution.
    pending_gap: Vec<u64>,
    /// A gap was resolved as a break but no point has arrived to carry it.
    gap_open: bool,
    open: Option<OpenWindow>,
}

impl FixationTracker {
    pub fn new(config: FixationConfig, screen_width_px: u32, screen_height_px: u32) -> Self {
        Self {
            config,
            screen_w: screen_width_px as f64,
            screen_h: screen_height_px as f64,
            committed: Vec::new(),
            points: Vec::new(),
            last_valid: None,
            pending_gap: Vec::new(),
            gap_open: false,
            open: None,
        }
    }

    pub fn config(&self) -> &FixationConfig {
        &self.config
    }

    fn point(&self, t: u64, x: f64, y: f64, pupil: Option<f64>) -> Point {
        Point {
            t,
            x,
            y,
            px: x * self.screen_w,
            py: y * self.screen_h,
            pupil,
            gap_before: false,
        }
    }

    pub fn push(&mut self, sample: &GazeSample) {
        if !sample.is_valid() {
            if self.config.validity_policy == ValidityPolicy::InterpolateShortGaps && self.last_valid.is_some() {
                self.pending_gap.push(sample.timestamp_us);
            }
            return;
        }
        let mut point = self.point(sample.timestamp_us, sample.gaze_x, sample.gaze_y, sample.pupil_mm());
        if let Some(prev) = self.last_valid {
            if !self.pending_gap.is_empty() {
                let span_us = point.t - prev.t;
                if span_us as f64 <= self.config.max_gap_ms * 1000.0 && span_us > 0 {
                    for &t in &self.pending_gap {
                        let w = (t - prev.t) as f64 / span_us as f64;
                        let x = prev.x + (point.x - prev.x) * w;
                        let y = prev.y + (point.y - prev.y) * w;
                        let mut filled = self.point(t, x, y, None);
                        filled.gap_before = std::mem::take(&mut self.gap_open);
                        self.points.push(filled);
                    }
                } else {
                    self.gap_open = true;
                }
                self.pending_gap.clear();
            }
        }
        point.gap_before = std::mem::take(&mut self.gap_open);
        self.last_valid = Some(point);
        self.points.push(point);
        self.advance();
    }

    pub fn extend<'a>(&mut self, samples: impl IntoIterator<Item = &'a GazeSample>) {
        for s in samples {
            self.push(s);
        }
    }

    fn advance(&mut self) {
        let result = scan(&self.points, 0, self.open.take(), &self.config, false);
        self.committed.extend(result.fixations);
        self.open = result.open.map(|w| OpenWindow {
            end: w.end - result.resume,
            bounds: w.bounds,
        });
        if result.resume > 0 {
            self.points.drain(..result.resume);
        }
    }

    /// Fixations that can no longer change as more samples arrive.
    pub fn committed(&self) -> &[Fixation] {
        &self.committed
    }

    /// All fixations of the stream so far, treating the current end as the end
    /// of the recording.
    pub fn fixations(&self) -> Vec<Fixation> {
        let tail = scan(&self.points, 0, self.open, &self.config, true);
        let mut all = self.committed.clone();
        all.extend(tail.fixations);
        all
    }
}

/// Detects fixations over a whole recording. Pixel conversion uses the
/// recording's screen dimensions.
pub fn detect_fixations(recording: &GazeRecording, config: &FixationConfig) -> Vec<Fixation> {
    let points = prepare_points(recording, config);
    scan(&points, 0, None, config, true).fixations
}

/// Applies the validity policy to a complete recording.
fn prepare_points(recording: &GazeRecording, config: &FixationConfig) -> Vec<Point> {
    let sw = recording.screen_width_px as f64;
    let sh = recording.screen_height_px as f64;
    let point = |t: u64, x: f64, y: f64, pupil: Option<f64>, gap_before: bool| Point {
        t,
        x,
        y,
        px: x * sw,
        py: y * sh,
        pupil,
        gap_before,
    };
    let samples = &recording.samples;
    let mut points = Vec::with_capacity(samples.len());
    let mut i = 0;
    let mut break_next = false;
    while i < samples.len() {
        let s = &samples[i];
        if s.is_valid() {
            points.push(point(s.timestamp_us, s.gaze_x, s.gaze_y, s.pupil_mm(), break_next));
            break_next = false;
            i += 1;
            continue;
        }
        let run_start = i;
        while i < samples.len() && !samples[i].is_valid() {
            i += 1;
        }
        if config.validity_policy == ValidityPolicy::DropInvalid {
            continue;
        }
        // Leading and trailing runs have nothing to interpolate between.
        let (Some(before), Some(after)) = (run_start.checked_sub(1).map(|k| &samples[k]), samples.get(i)) else {
            continue;
        };
        let span_us = after.timestamp_us - before.timestamp_us;
        if span_us == 0 || span_us as f64 > config.max_gap_ms * 1000.0 {
            break_next = true;
            continue;
        }
        for gap in &samples[run_start..i] {
            let w = (gap.timestamp_us - before.timestamp_us) as f64 / span_us as f64;
            let x = before.gaze_x + (after.gaze_x - before.gaze_x) * w;
            let y = before.gaze_y + (after.gaze_y - before.gaze_y) * w;
            points.push(point(gap.timestamp_us, x, y, None, false));
        }
    }
    points
}

pub fn fixation_durations_ms(fixations: &[Fixation]) -> Vec<f64> {
    fixations.iter().map(Fixation::duration_ms).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::RecordingHeader;

    fn rec(samples: Vec<GazeSample>) -> GazeRecording {
        GazeRecording::new(RecordingHeader::default(), samples).unwrap()
    }

    fn at(t: u64, px: f64, py: f64) -> GazeSample {
        GazeSample::binocular(t, px / 1920.0, py / 1080.0, 3.0)
    }

    #[test]
    fn stationary_gaze_is_one_fixation() {
        // 30 samples spanning exactly 500 ms
        let samples = (0..30).map(|i| at(i * 500_000 / 29, 400.0, 300.0)).collect();
        let fx = detect_fixations(&rec(samples), &FixationConfig::default());
        assert_eq!(fx.len(), 1);
        assert_eq!(fx[0].duration_ms(), 500.0);
        assert_eq!(fx[0].sample_count, 30);
        assert_eq!(fx[0].mean_pupil_mm, Some(3.0));
    }

    #[test]
    fn opposite_corners_two_fixations() {
        let mut samples = Vec::new();
        let mut t = 0;
        for _ in 0..19 {
            samples.push(at(t, 10.0, 10.0));
            t += 16_667;
        }
        samples.push(at(t, 700.0, 400.0));
        t += 16_667;
        samples.push(at(t, 1300.0, 700.0));
        t += 16_667;
        for _ in 0..19 {
            samples.push(at(t, 1910.0, 1070.0));
            t += 16_667;
        }
        let fx = detect_fixations(&rec(samples), &FixationConfig::default());
        assert_eq!(fx.len(), 2);
        assert!(fx[0].end_us <= fx[1].start_us);
        assert_eq!(fx[0].sample_count, 19);
        assert_eq!(fx[1].sample_count, 19);
    }

    #[test]
    fn too_short_dwell_is_ignored() {
        let samples = (0..5).map(|i| at(i * 16_667, 400.0, 300.0)).collect();
        assert!(detect_fixations(&rec(samples), &FixationConfig::default()).is_empty());
    }

    #[test]
    fn empty_recording_has_no_fixations() {
        assert!(detect_fixations(&rec(vec![]), &FixationConfig::default()).is_empty());
    }

    #[test]
    fn durations_match_timestamps() {
        let f = Fixation {
            start_us: 0,
            end_us: 241_310,
            centroid_x: 0.5,
            centroid_y: 0.5,
            sample_count: 2,
            mean_pupil_mm: None,
        };
        assert_eq!(fixation_durations_ms(&[f]), vec![241.31]);
        assert!(fixation_durations_ms(&[]).is_empty());
    }

    fn blink_trace() -> Vec<GazeSample> {
        // 12 samples, a 3-sample blink, 12 samples, all at one spot.
        let mut samples = Vec::new();
        for i in 0..27u64 {
            let t = i * 16_667;
            if (12..15).contains(&i) {
                samples.push(GazeSample::lost(t));
            } else {
                samples.push(at(t, 500.0, 500.0));
            }
        }
        samples
    }

    #[test]
    fn short_blink_is_bridged() {
        let fx = detect_fixations(&rec(blink_trace()), &FixationConfig::default());
        assert_eq!(fx.len(), 1);
        assert_eq!(fx[0].sample_count, 27);
        assert_eq!(fx[0].duration_us(), 26 * 16_667);
    }

    #[test]
    fn long_gap_splits_window() {
        let config = FixationConfig {
            max_gap_ms: 40.0,
            ..Default::default()
        };
        let fx = detect_fixations(&rec(blink_trace()), &config);
        assert_eq!(fx.len(), 2);
        assert_eq!(fx[0].sample_count, 12);
        assert_eq!(fx[1].sample_count, 12);
    }

    #[test]
    fn drop_invalid_spans_blink() {
        let config = FixationConfig {
            validity_policy: ValidityPolicy::DropInvalid,
            max_gap_ms: 0.0,
            ..Default::default()
        };
        let fx = detect_fixations(&rec(blink_trace()), &config);
        assert_eq!(fx.len(), 1);
        assert_eq!(fx[0].sample_count, 24);
    }

    #[test]
    fn one_eyed_pupil_counts() {
        let mut s = at(0, 500.0, 500.0);
        s.valid_right = false;
        s.pupil_left_mm = Some(2.0);
        let mut samples = vec![s];
        for i in 1..10 {
            let mut s = at(i * 16_667, 500.0, 500.0);
            s.valid_left = false;
            s.pupil_right_mm = Some(4.0);
            samples.push(s);
        }
        let fx = detect_fixations(&rec(samples), &FixationConfig::default());
        assert_eq!(fx.len(), 1);
        let expected = (2.0 + 9.0 * 4.0) / 10.0;
        assert!((fx[0].mean_pupil_mm.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn tracker_matches_batch_on_every_prefix() {
        let samples = blink_trace();
        let config = FixationConfig::default();
        let mut tracker = FixationTracker::new(config.clone(), 1920, 1080);
        for (i, s) in samples.iter().enumerate() {
            tracker.push(s);
            let batch = detect_fixations(&rec(samples[..=i].to_vec()), &config);
            assert_eq!(tracker.fixations(), batch, "prefix {i}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(FixationConfig::default().validate().is_ok());
        let bad = FixationConfig {
            dispersion_max_px: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = FixationConfig {
            min_duration_ms: -5.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
