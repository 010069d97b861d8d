//! Brute-force reference computations shared by the integration tests.
//!
//! Everything here works straight from raw samples with plain loops and does
//! not call into the metric or detection code it is used to check.
#![allow(dead_code)]

use gazeprompt_core::{EditorGeometry, Fixation, GazeRecording, GazeSample};

pub fn pupil_of(s: &GazeSample) -> Option<f64> {
    let mut vals = Vec::new();
    if s.valid_left {
        if let Some(p) = s.pupil_left_mm {
            vals.push(p);
        }
    }
    if s.valid_right {
        if let Some(p) = s.pupil_right_mm {
            vals.push(p);
        }
    }
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

pub fn valid(s: &GazeSample) -> bool {
    s.valid_left || s.valid_right
}

/// Mean of per-sample pupils in the first 60 ms, else of the first five valid.
pub fn baseline(rec: &GazeRecording) -> Option<f64> {
    let t0 = rec.samples.first()?.timestamp_us;
    let window: Vec<f64> = rec
        .samples
        .iter()
        .filter(|s| s.timestamp_us - t0 < 60_000)
        .filter_map(pupil_of)
        .collect();
    let chosen: Vec<f64> = if window.is_empty() {
        rec.samples.iter().filter_map(pupil_of).take(5).collect()
    } else {
        window
    };
    if chosen.is_empty() {
        None
    } else {
        Some(chosen.iter().sum::<f64>() / chosen.len() as f64)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Reference {
    pub mean_fixation_duration_ms: Option<f64>,
    pub fixation_count_per_s: Option<f64>,
    pub mean_saccade_length_px: Option<f64>,
    pub mean_pupil_dilation_mm: Option<f64>,
    pub n_pupil: usize,
}

pub fn metrics(rec: &GazeRecording, fixations: &[Fixation], base: Option<f64>) -> Reference {
    let first = rec.samples.first().unwrap().timestamp_us as f64;
    let last = rec.samples.last().unwrap().timestamp_us as f64;
    let total_ms = (last - first) / 1000.0;

    let n = fixations.len();
    let mut dur_total = 0.0;
    for f in fixations {
        dur_total += (f.end_us as f64 - f.start_us as f64) / 1000.0;
    }
    let (mfd, rate) = if n == 0 {
        (None, None)
    } else {
        (Some(dur_total / n as f64), Some(n as f64 / (total_ms / 1000.0)))
    };

    let mut sacc = Vec::new();
    for i in 1..rec.samples.len() {
        let (a, b) = (&rec.samples[i - 1], &rec.samples[i]);
        if valid(a) && valid(b) {
            let d = ((b.gaze_x - a.gaze_x).powi(2) + (b.gaze_y - a.gaze_y).powi(2)).sqrt();
            sacc.push(d * rec.screen_width_px as f64);
        }
    }
    let msl = if sacc.is_empty() {
        None
    } else {
        Some(sacc.iter().sum::<f64>() / sacc.len() as f64)
    };

    let pupils: Vec<f64> = rec.samples.iter().filter_map(pupil_of).collect();
    let dil = match base {
        Some(b) if !pupils.is_empty() => Some(pupils.iter().map(|p| p - b).sum::<f64>() / pupils.len() as f64),
        _ => None,
    };
    Reference {
        mean_fixation_duration_ms: mfd,
        fixation_count_per_s: rate,
        mean_saccade_length_px: msl,
        mean_pupil_dilation_mm: dil,
        n_pupil: pupils.len(),
    }
}

pub fn rel_close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => {
            let scale = a.abs().max(b.abs());
            scale == 0.0 || (a - b).abs() / scale <= tol || (a - b).abs() <= tol * 1e-3
        }
        _ => false,
    }
}

/// Samples whose timestamps fall inside a fixation's span.
pub fn members<'a>(rec: &'a GazeRecording, f: &Fixation) -> Vec<&'a GazeSample> {
    rec.samples
        .iter()
        .filter(|s| s.timestamp_us >= f.start_us && s.timestamp_us <= f.end_us && valid(s))
        .collect()
}

/// Finds the cell containing a pixel by walking the grid cell by cell.
pub fn cell_scan(px: f64, py: f64, g: &EditorGeometry) -> Option<(u32, u32)> {
    let bottom = (g.origin_y_px + g.visible_line_count as f64 * g.line_height_px).min(g.screen_height_px as f64);
    let mut line = g.first_visible_line;
    let mut top = g.origin_y_px;
    while top < bottom {
        let line_bottom = top + g.line_height_px;
        if py >= top && py < line_bottom && py < bottom {
            let mut col = 1;
            let mut left = g.origin_x_px;
            while left < g.screen_width_px as f64 {
                if px >= left && px < left + g.char_width_px && px < g.screen_width_px as f64 {
                    return Some((line, col));
                }
                left += g.char_width_px;
                col += 1;
            }
            return None;
        }
        top = line_bottom;
        line += 1;
    }
    None
}

/// Replaces short runs of samples with tracker dropouts, deterministically.
pub fn with_blinks(rec: &GazeRecording, every: usize, run: usize) -> GazeRecording {
    let mut out = rec.clone();
    let mut i = every;
    while i + run < out.samples.len() {
        for s in &mut out.samples[i..i + run] {
            *s = GazeSample::lost(s.timestamp_us);
        }
        i += every;
    }
    out
}
