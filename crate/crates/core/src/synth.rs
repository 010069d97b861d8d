//! Seeded synthetic reading scanpaths.
//!
//! A trace is a sequence of dwells on the editor's text area. Novices read
//! linearly with short forward hops and a return sweep at each line end;
//! experts jump between distant parts of the code. Each dwell holds the gaze
//! at one point with small fixational noise; saccades complete between two
//! samples. The pupil drifts from a base diameter up by a profile-specific
//! load during the first two seconds.
//!
//! Independent RNG streams drive dwell timing, hop lengths, layout and noise,
//! so changing the hop distance leaves timing and noise untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::codemap::EditorGeometry;
use crate::error::ConfigError;
use crate::sample::{GazeRecording, GazeSample, RecordingHeader, DEFAULT_SAMPLE_RATE_HZ};

/// Shortest dwell the generator emits, including a truncated final one.
pub const MIN_DWELL_MS: f64 = 150.0;
/// Fixational noise, standard deviation per axis and hard clamp.
const NOISE_SD_PX: f64 = 1.5;
const NOISE_CLAMP_PX: f64 = 4.5;
const PUPIL_NOISE_SD_MM: f64 = 0.02;
const PUPIL_RAMP_US: f64 = 2_000_000.0;
/// Hop lengths are drawn from `hop_distance_px * [1 - HOP_SPREAD, 1 + HOP_SPREAD]`.
const HOP_SPREAD: f64 = 0.3;
/// Widest line of code considered, in characters.
const MAX_LINE_CHARS: u32 = 80;
const MIN_LINE_CHARS: u32 = 20;
/// Consecutive dwell centers are kept at least this far apart.
const MIN_SEPARATION_PX: f64 = 50.0;

const STREAM_TIMING: u64 = 1;
const STREAM_HOPS: u64 = 2;
const STREAM_LAYOUT: u64 = 3;
const STREAM_NOISE: u64 = 4;
const STREAM_PUPIL: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Novice,
    Expert,
}

impl FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "novice" => Ok(ProfileKind::Novice),
            "expert" => Ok(ProfileKind::Expert),
            other => Err(format!("unknown profile `{other}` (expected novice or expert)")),
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Novice => "novice",
            ProfileKind::Expert => "expert",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanpathProfile {
    pub profile_kind: ProfileKind,
    pub mean_dwell_ms: f64,
    pub dwell_jitter_ms: f64,
    pub hop_distance_px: f64,
    pub pupil_base_mm: f64,
    pub pupil_load_mm: f64,
    pub rng_seed: u64,
}

impl ScanpathProfile {
    pub fn novice(seed: u64) -> Self {
        Self {
            profile_kind: ProfileKind::Novice,
            mean_dwell_ms: 320.0,
            dwell_jitter_ms: 80.0,
            hop_distance_px: 70.0,
            pupil_base_mm: 3.2,
            pupil_load_mm: 0.35,
            rng_seed: seed,
        }
    }

    pub fn expert(seed: u64) -> Self {
        Self {
            profile_kind: ProfileKind::Expert,
            mean_dwell_ms: 220.0,
            dwell_jitter_ms: 50.0,
            hop_distance_px: 380.0,
            pupil_base_mm: 3.2,
            pupil_load_mm: 0.05,
            rng_seed: seed,
        }
    }

    pub fn for_kind(kind: ProfileKind, seed: u64) -> Self {
        match kind {
            ProfileKind::Novice => Self::novice(seed),
            ProfileKind::Expert => Self::expert(seed),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("mean_dwell_ms", self.mean_dwell_ms),
            ("hop_distance_px", self.hop_distance_px),
            ("pupil_base_mm", self.pupil_base_mm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Profile(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("dwell_jitter_ms", self.dwell_jitter_ms),
            ("pupil_load_mm", self.pupil_load_mm),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::Profile(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Ground truth for one generated dwell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedDwell {
    pub start_us: u64,
    pub end_us: u64,
    pub sample_count: usize,
    pub center_x_px: f64,
    pub center_y_px: f64,
}

impl PlannedDwell {
    pub fn duration_ms(&self) -> f64 {
        (self.end_us - self.start_us) as f64 / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTrace {
    pub recording: GazeRecording,
    pub dwells: Vec<PlannedDwell>,
}

/// Axis-aligned text area dwells are placed in.
#[derive(Debug, Clone, Copy)]
struct TextArea {
    left: f64,
    right: f64,
    top: f64,
    rows: u32,
    line_height: f64,
    char_width: f64,
}

impl TextArea {
    fn from_geometry(g: &EditorGeometry) -> Result<Self, ConfigError> {
        g.validate()?;
        let left = g.origin_x_px;
        let right = (left + MAX_LINE_CHARS as f64 * g.char_width_px).min(g.screen_width_px as f64);
        let fit_rows = ((g.screen_height_px as f64 - g.origin_y_px) / g.line_height_px).floor();
        let rows = (g.visible_line_count as f64).min(fit_rows);
        if rows.is_nan() || rows < 1.0 || right - left < MIN_LINE_CHARS as f64 * g.char_width_px {
            return Err(ConfigError::Geometry("text area too small to place a scanpath".into()));
        }
        Ok(Self {
            left,
            right,
            top: g.origin_y_px,
            rows: rows as u32,
            line_height: g.line_height_px,
            char_width: g.char_width_px,
        })
    }

    fn bottom(&self) -> f64 {
        self.top + self.rows as f64 * self.line_height
    }

    fn row_center(&self, row: u32) -> f64 {
        self.top + (row as f64 + 0.5) * self.line_height
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.left && x < self.right && y >= self.top && y < self.bottom()
    }
}

/// Line-by-line reader with short forward hops.
struct LinearReader {
    row: u32,
    line_end: f64,
    x: f64,
}

impl LinearReader {
    fn start(area: &TextArea, layout: &mut ChaCha8Rng) -> Self {
        let mut reader = Self {
            row: 0,
            line_end: 0.0,
            x: 0.0,
        };
        reader.begin_line(area, layout);
        reader
    }

    fn begin_line(&mut self, area: &TextArea, layout: &mut ChaCha8Rng) {
        let indent = layout.random_range(0..8u32) as f64;
        let chars = layout.random_range(MIN_LINE_CHARS..=MAX_LINE_CHARS) as f64;
        self.x = area.left + (indent + 0.5) * area.char_width;
        self.line_end = (self.x + chars * area.char_width).min(area.right - area.char_width / 2.0);
    }

    fn position(&self, area: &TextArea) -> (f64, f64) {
        (self.x, area.row_center(self.row))
    }

    fn hop(&mut self, length: f64, area: &TextArea, layout: &mut ChaCha8Rng) {
        if self.x + length <= self.line_end {
            self.x += length;
            return;
        }
        let from = self.position(area);
        loop {
            self.row = (self.row + 1) % area.rows;
            self.begin_line(area, layout);
            let (x, y) = self.position(area);
            if (x - from.0).hypot(y - from.1) >= MIN_SEPARATION_PX || area.rows == 1 {
                break;
            }
        }
    }
}

/// Jumps of roughly fixed length in a random direction, reflected to stay on
/// the text area.
fn expert_jump(from: (f64, f64), length: f64, angle: f64, area: &TextArea) -> (f64, f64) {
    let (dx, dy) = (length * angle.cos(), length * angle.sin());
    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
        let (x, y) = (from.0 + sx * dx, from.1 + sy * dy);
        if area.contains(x, y) {
            return (x, y);
        }
    }
    // Head toward the roomier side on each axis and stop at the edge.
    let mid_x = (area.left + area.right) / 2.0;
    let mid_y = (area.top + area.bottom()) / 2.0;
    let sx = if from.0 < mid_x { 1.0 } else { -1.0 };
    let sy = if from.1 < mid_y { 1.0 } else { -1.0 };
    let x = (from.0 + sx * dx.abs()).clamp(area.left, area.right - area.char_width / 2.0);
    let y = (from.1 + sy * dy.abs()).clamp(area.top, area.bottom() - area.line_height / 2.0);
    (x, y)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Timestamp of sample `k` at `rate_hz`, rounded to the microsecond.
pub fn sample_timestamp_us(k: u64, rate_hz: f64) -> u64 {
    (k as f64 * 1e6 / rate_hz).round() as u64
}

/// Generates a seeded synthetic trace over `geometry`'s text area.
pub fn synth_trace(
    profile: &ScanpathProfile,
    geometry: &EditorGeometry,
    duration_ms: f64,
) -> Result<SyntheticTrace, ConfigError> {
    if !(duration_ms.is_finite() && duration_ms > 0.0) {
        return Err(ConfigError::Duration(duration_ms));
    }
    profile.validate()?;
    let area = TextArea::from_geometry(geometry)?;
    let rate = DEFAULT_SAMPLE_RATE_HZ;
    let duration_us = duration_ms * 1000.0;
    let total = (0u64..)
        .take_while(|&k| (sample_timestamp_us(k, rate) as f64) < duration_us)
        .count();
    let samples_for = |ms: f64| (ms * rate / 1000.0).round() as usize + 1;
    let min_samples = samples_for(MIN_DWELL_MS);

    let seed = profile.rng_seed;
    let mut timing = stream(seed, STREAM_TIMING);
    let mut hops = stream(seed, STREAM_HOPS);
    let mut layout = stream(seed, STREAM_LAYOUT);
    let mut noise_rng = stream(seed, STREAM_NOISE);
    let mut pupil_rng = stream(seed, STREAM_PUPIL);
    let noise = Normal::new(0.0, NOISE_SD_PX).expect("valid sd");
    let pupil_noise = Normal::new(0.0, PUPIL_NOISE_SD_MM).expect("valid sd");

    let mut reader = LinearReader::start(&area, &mut layout);
    let mut center = match profile.profile_kind {
        ProfileKind::Novice => reader.position(&area),
        ProfileKind::Expert => (
            layout.random_range(area.left..area.right),
            area.row_center(layout.random_range(0..area.rows)),
        ),
    };

    let sw = geometry.screen_width_px as f64;
    let sh = geometry.screen_height_px as f64;
    let mut samples = Vec::with_capacity(total);
    let mut dwells = Vec::new();
    let mut k = 0usize;
    while k < total {
        let jitter = profile.dwell_jitter_ms * timing.random_range(-1.0..=1.0);
        let dwell_ms = (profile.mean_dwell_ms + jitter).max(MIN_DWELL_MS);
        let mut n = samples_for(dwell_ms);
        let remaining = total - k;
        if remaining < n + min_samples {
            n = remaining;
        }
        let first = k;
        for _ in 0..n {
            let t = sample_timestamp_us(k as u64, rate);
            let nx = noise.sample(&mut noise_rng).clamp(-NOISE_CLAMP_PX, NOISE_CLAMP_PX);
            let ny = noise.sample(&mut noise_rng).clamp(-NOISE_CLAMP_PX, NOISE_CLAMP_PX);
            let ramp = (t as f64 / PUPIL_RAMP_US).min(1.0);
            let pupil = profile.pupil_base_mm + profile.pupil_load_mm * ramp;
            let left = pupil + pupil_noise.sample(&mut pupil_rng).clamp(-0.06, 0.06);
            let right = pupil + pupil_noise.sample(&mut pupil_rng).clamp(-0.06, 0.06);
            samples.push(GazeSample {
                timestamp_us: t,
                gaze_x: (center.0 + nx) / sw,
                gaze_y: (center.1 + ny) / sh,
                pupil_left_mm: Some(left),
                pupil_right_mm: Some(right),
                valid_left: true,
                valid_right: true,
            });
            k += 1;
        }
        dwells.push(PlannedDwell {
            start_us: sample_timestamp_us(first as u64, rate),
            end_us: sample_timestamp_us((k - 1) as u64, rate),
            sample_count: n,
            center_x_px: center.0,
            center_y_px: center.1,
        });

        let length = profile.hop_distance_px * hops.random_range(1.0 - HOP_SPREAD..=1.0 + HOP_SPREAD);
        let angle = hops.random_range(0.0..std::f64::consts::TAU);
        center = match profile.profile_kind {
            ProfileKind::Novice => {
                reader.hop(length, &area, &mut layout);
                reader.position(&area)
            }
            ProfileKind::Expert => expert_jump(center, length, angle, &area),
        };
    }

    let header = RecordingHeader {
        session_id: format!("synth-{}-{}", profile.profile_kind, seed),
        screen_width_px: geometry.screen_width_px,
        screen_height_px: geometry.screen_height_px,
        sample_rate_hz: rate,
    };
    let recording = GazeRecording::new(header, samples).expect("generator emits monotonic, valid samples");
    Ok(SyntheticTrace { recording, dwells })
}
