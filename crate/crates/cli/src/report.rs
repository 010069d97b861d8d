//! Plain-text renderings of command results.

use std::fmt::Write;

use serde::Serialize;

use gazeprompt_core::{evaluate_thresholds, GazeMetrics, SaccadeDirection, ThresholdConfig, TriggerFlags};

use crate::client::ReplayOutcome;

#[derive(Debug, Serialize)]
pub struct SynthSummary {
    pub path: String,
    pub profile: String,
    pub seed: u64,
    pub samples: usize,
    pub dwells: usize,
}

const FLAG_NAMES: [&str; 4] = [
    "long_fixation_duration",
    "high_fixation_count",
    "short_saccades",
    "high_pupil_dilation",
];

pub fn flag_names(flags: &TriggerFlags) -> String {
    let on: Vec<&str> = flags
        .as_array()
        .iter()
        .zip(FLAG_NAMES)
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
    if on.is_empty() {
        "none".into()
    } else {
        on.join(" ")
    }
}

fn value(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.3}"))
}

pub fn metrics_table(m: &GazeMetrics, t: &ThresholdConfig) -> String {
    let flags = evaluate_thresholds(m, t).as_array();
    let sacc_cmp = match t.saccade_trigger_direction {
        SaccadeDirection::Below => "<",
        SaccadeDirection::Above => ">",
    };
    let rows = [
        (
            "mean fixation duration (ms)",
            m.mean_fixation_duration_ms,
            ">",
            t.fixation_duration_ms,
        ),
        (
            "fixation count (/s)",
            m.fixation_count_per_s,
            ">",
            t.fixation_count_per_s,
        ),
        (
            "mean saccade length (px)",
            m.mean_saccade_length_px,
            sacc_cmp,
            t.saccade_length_px,
        ),
        (
            "mean pupil dilation (mm)",
            m.mean_pupil_dilation_mm,
            ">",
            t.pupil_dilation_mm,
        ),
    ];
    let mut out = String::new();
    let _ = writeln!(out, "{:<30} {:>12}  {:>12}  triggered", "metric", "value", "threshold");
    for ((name, v, cmp, th), on) in rows.into_iter().zip(flags) {
        let _ = writeln!(
            out,
            "{name:<30} {:>12}  {:>10} {cmp}  {}",
            value(v),
            format!("{th}"),
            if on { "yes" } else { "no" }
        );
    }
    let _ = writeln!(
        out,
        "fixations {}  pupil samples {}  baseline {} mm  duration {:.1} ms",
        m.n_fixations,
        m.n_pupil_samples,
        value(m.baseline_pupil_mm),
        m.total_time_ms
    );
    out
}

pub fn replay_text(o: &ReplayOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "session {}: sent {} samples in {} requests",
        o.session_id, o.samples_sent, o.requests
    );
    let _ = writeln!(out, "journal {}", o.journal);
    if let Some(p) = &o.prompt {
        let flags: Option<TriggerFlags> = serde_json::from_value(p["flags"].clone()).ok();
        let _ = writeln!(
            out,
            "flags: {}",
            flags.map_or_else(|| "none".into(), |f| flag_names(&f))
        );
        let _ = writeln!(out, "prompt: {}", p["prompt"]["text"].as_str().unwrap_or_default());
    }
    if let Some(r) = &o.refactor {
        let _ = writeln!(
            out,
            "refactored code ({}):",
            r["backend_name"].as_str().unwrap_or("backend")
        );
        let _ = writeln!(out, "{}", r["refactored_code"].as_str().unwrap_or_default());
    }
    out
}
