//! Mapping screen gaze onto a monospace editor grid.
//!
//! The editor is modeled as a fixed grid of character cells: column 1 starts at
//! `origin_x_px`, line `first_visible_line` starts at `origin_y_px`, and every
//! cell is `char_width_px` by `line_height_px`. The text viewport spans from the
//! origin to the right screen edge and down `visible_line_count` lines (clipped
//! to the screen).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::fixation::Fixation;
use crate::sample::GazeSample;

/// Columns a tab advances to the next multiple of.
pub const TAB_WIDTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EditorGeometry {
    pub file_path: String,
    pub origin_x_px: f64,
    pub origin_y_px: f64,
    pub char_width_px: f64,
    pub line_height_px: f64,
    pub first_visible_line: u32,
    pub visible_line_count: u32,
    pub screen_width_px: u32,
    pub screen_height_px: u32,
}

impl Default for EditorGeometry {
    fn default() -> Self {
        Self {
            file_path: "Snippet.java".into(),
            origin_x_px: 100.0,
            origin_y_px: 60.0,
            char_width_px: 9.0,
            line_height_px: 18.0,
            first_visible_line: 1,
            visible_line_count: 50,
            screen_width_px: 1920,
            screen_height_px: 1080,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeLocation {
    pub file_path: String,
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineGazeSummary {
    pub line: u32,
    pub fixation_count: usize,
    pub total_fixation_ms: f64,
}

impl EditorGeometry {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            self.origin_x_px,
            self.origin_y_px,
            self.char_width_px,
            self.line_height_px,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(ConfigError::Geometry("pixel quantities must be finite".into()));
        }
        if self.char_width_px <= 0.0 {
            return Err(ConfigError::Geometry("char_width_px must be positive".into()));
        }
        if self.line_height_px <= 0.0 {
            return Err(ConfigError::Geometry("line_height_px must be positive".into()));
        }
        if self.first_visible_line == 0 {
            return Err(ConfigError::Geometry("first_visible_line is 1-based".into()));
        }
        if self.visible_line_count == 0 {
            return Err(ConfigError::Geometry("visible_line_count must be at least 1".into()));
        }
        if self.screen_width_px == 0 || self.screen_height_px == 0 {
            return Err(ConfigError::Geometry("screen dimensions must be positive".into()));
        }
        Ok(())
    }

    /// Right edge (exclusive) of the text viewport in pixels.
    pub fn viewport_right_px(&self) -> f64 {
        self.screen_width_px as f64
    }

    /// Bottom edge (exclusive) of the text viewport in pixels.
    pub fn viewport_bottom_px(&self) -> f64 {
        let text_bottom = self.origin_y_px + self.visible_line_count as f64 * self.line_height_px;
        text_bottom.min(self.screen_height_px as f64)
    }

    pub fn last_visible_line(&self) -> u32 {
        self.first_visible_line + self.visible_line_count - 1
    }

    /// Pixel position of the top-left corner of a cell.
    pub fn cell_origin_px(&self, line: u32, column: u32) -> (f64, f64) {
        (
            self.origin_x_px + (column - 1) as f64 * self.char_width_px,
            self.origin_y_px + (line - self.first_visible_line) as f64 * self.line_height_px,
        )
    }

    pub fn to_pixels(&self, gaze_x: f64, gaze_y: f64) -> (f64, f64) {
        (
            gaze_x * self.screen_width_px as f64,
            gaze_y * self.screen_height_px as f64,
        )
    }

    pub fn to_normalized(&self, px: f64, py: f64) -> (f64, f64) {
        (px / self.screen_width_px as f64, py / self.screen_height_px as f64)
    }

    /// Returns a copy scrolled so that `first_visible_line` is `line`.
    pub fn scrolled_to(&self, line: u32) -> Self {
        Self {
            first_visible_line: line.max(1),
            ..self.clone()
        }
    }
}

/// Maps a pixel position to the character cell containing it.
pub fn map_pixel(px: f64, py: f64, geometry: &EditorGeometry) -> Option<CodeLocation> {
    if !(px.is_finite() && py.is_finite()) {
        return None;
    }
    if px < geometry.origin_x_px
        || px >= geometry.viewport_right_px()
        || py < geometry.origin_y_px
        || py >= geometry.viewport_bottom_px()
    {
        return None;
    }
    let row = ((py - geometry.origin_y_px) / geometry.line_height_px).floor() as u32;
    let col = ((px - geometry.origin_x_px) / geometry.char_width_px).floor() as u32;
    // Guard the floor against rounding past the viewport edge.
    let row = row.min(geometry.visible_line_count - 1);
    Some(CodeLocation {
        file_path: geometry.file_path.clone(),
        line: geometry.first_visible_line + row,
        column: 1 + col,
    })
}

/// Maps a gaze sample to a source location; invalid samples and gaze outside
/// the text viewport map to nothing.
pub fn map_gaze(sample: &GazeSample, geometry: &EditorGeometry) -> Option<CodeLocation> {
    if !sample.is_valid() {
        return None;
    }
    let (px, py) = geometry.to_pixels(sample.gaze_x, sample.gaze_y);
    map_pixel(px, py, geometry)
}

/// Per-line fixation totals, sorted by line. Fixations whose centroid falls
/// outside the viewport are dropped.
pub fn line_summaries(fixations: &[Fixation], geometry: &EditorGeometry) -> Vec<LineGazeSummary> {
    let mut by_line: BTreeMap<u32, LineGazeSummary> = BTreeMap::new();
    for fixation in fixations {
        let (px, py) = geometry.to_pixels(fixation.centroid_x, fixation.centroid_y);
        let Some(loc) = map_pixel(px, py, geometry) else {
            continue;
        };
        let entry = by_line.entry(loc.line).or_insert(LineGazeSummary {
            line: loc.line,
            fixation_count: 0,
            total_fixation_ms: 0.0,
        });
        entry.fixation_count += 1;
        entry.total_fixation_ms += fixation.duration_ms();
    }
    by_line.into_values().collect()
}

/// Expands tabs to the next multiple of [`TAB_WIDTH`] so that columns count
/// character cells.
pub fn expand_tabs(source: &str) -> String {
    let mut out = String::with_capacity(source.len());
    for (i, line) in source.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let mut col = 0usize;
        for ch in line.chars() {
            if ch == '\t' {
                let pad = TAB_WIDTH - col % TAB_WIDTH;
                out.extend(std::iter::repeat_n(' ', pad));
                col += pad;
            } else {
                out.push(ch);
                col += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> EditorGeometry {
        EditorGeometry::default()
    }

    #[test]
    fn worked_example() {
        let loc = map_pixel(145.0, 96.0, &geometry()).unwrap();
        assert_eq!((loc.line, loc.column), (3, 6));
        assert_eq!(loc.file_path, "Snippet.java");
    }

    #[test]
    fn left_of_origin_is_outside() {
        assert_eq!(map_pixel(50.0, 96.0, &geometry()), None);
    }

    #[test]
    fn below_last_line_is_outside() {
        let g = EditorGeometry {
            visible_line_count: 3,
            ..geometry()
        };
        assert!(map_pixel(120.0, 60.0 + 3.0 * 18.0 - 0.001, &g).is_some());
        assert_eq!(map_pixel(120.0, 60.0 + 3.0 * 18.0, &g), None);
    }

    #[test]
    fn scroll_offsets_lines() {
        let g = geometry().scrolled_to(40);
        let loc = map_pixel(145.0, 96.0, &g).unwrap();
        assert_eq!(loc.line, 42);
    }

    #[test]
    fn invalid_sample_maps_to_nothing() {
        let s = GazeSample::lost(0);
        assert_eq!(map_gaze(&s, &geometry()), None);
    }

    #[test]
    fn rejects_degenerate_geometry() {
        let g = EditorGeometry {
            line_height_px: 0.0,
            ..geometry()
        };
        assert!(g.validate().is_err());
        let g = EditorGeometry {
            char_width_px: -1.0,
            ..geometry()
        };
        assert!(g.validate().is_err());
        assert!(geometry().validate().is_ok());
    }

    fn fixation_at(px: f64, py: f64, dur_ms: u64) -> Fixation {
        Fixation {
            start_us: 0,
            end_us: dur_ms * 1000,
            centroid_x: px / 1920.0,
            centroid_y: py / 1080.0,
            sample_count: 2,
            mean_pupil_mm: None,
        }
    }

    #[test]
    fn summaries_empty() {
        assert!(line_summaries(&[], &geometry()).is_empty());
    }

    #[test]
    fn summaries_add_up_per_line() {
        // line 7 spans y in [168, 186)
        let fx = vec![
            fixation_at(150.0, 170.0, 100),
            fixation_at(300.0, 175.0, 200),
            fixation_at(500.0, 180.0, 300),
        ];
        let s = line_summaries(&fx, &geometry());
        assert_eq!(
            s,
            vec![LineGazeSummary {
                line: 7,
                fixation_count: 3,
                total_fixation_ms: 600.0
            }]
        );
    }

    #[test]
    fn summaries_drop_off_viewport() {
        let fx = vec![fixation_at(10.0, 170.0, 100), fixation_at(150.0, 70.0, 100)];
        let s = line_summaries(&fx, &geometry());
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].line, 1);
    }

    #[test]
    fn tabs_expand_to_stops() {
        assert_eq!(expand_tabs("\tx"), "    x");
        assert_eq!(expand_tabs("ab\tc\n\td"), "ab  c\n    d");
    }
}
