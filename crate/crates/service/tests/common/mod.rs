#![allow(dead_code)]

use gazeprompt_core::{
    synth_trace, EditorGeometry, FixationConfig, GazeRecording, InteractionMode, ScanpathProfile, ThresholdConfig,
};
use gazeprompt_service::SessionSettings;

pub const SNIPPET: &str = "public class Messy {\n    int a(int x){int y=x*2;return y;}\n}\n";

pub fn settings(mode: InteractionMode) -> SessionSettings {
    SessionSettings {
        mode,
        geometry: EditorGeometry::default(),
        thresholds: ThresholdConfig::default(),
        fixation: FixationConfig::default(),
        snapshot_period_ms: 500,
        language_hint: "java".into(),
        source_code: SNIPPET.into(),
    }
}

pub fn novice(seed: u64, ms: f64) -> GazeRecording {
    synth_trace(&ScanpathProfile::novice(seed), &EditorGeometry::default(), ms)
        .unwrap()
        .recording
}

pub fn expert(seed: u64, ms: f64) -> GazeRecording {
    synth_trace(&ScanpathProfile::expert(seed), &EditorGeometry::default(), ms)
        .unwrap()
        .recording
}
