//! Gaze-informed prompt text.
//!
//! A realtime prompt names only the triggered metrics, each with the cognitive
//! state it indicates, followed by the refactoring command. The preset prompt
//! is fixed and names all four.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::GazeMetrics;
use crate::trigger::{evaluate_thresholds, ThresholdConfig, TriggerFlags};

pub const PROMPT_PREFIX: &str = "While reading the code, the developer demonstrated ";
pub const COMMAND: &str = "Improve the code.";

/// Cognitive-state fragments in canonical order: duration, count, saccade, pupil.
pub const FRAGMENTS: [&str; 4] = [
    "long fixation durations, indicating sustained attention and deep cognitive processing, suggesting higher complexity or ambiguity in the code",
    "high fixation count suggesting low visual efficiency, increased scanning, suggesting cognitive strain in locating meaningful cues",
    "short saccades indicating novice-like behavior and linear reading patterns, reflecting difficulty in identifying key code elements",
    "increased pupil dilation reflecting high cognitive effort and mental workload",
];

/// The fixed all-metrics prompt. Its first fragment has no comma after
/// "durations", unlike the realtime template.
pub const PRESET_PROMPT: &str = "While reading the code, the developer demonstrated long fixation durations indicating sustained attention and deep cognitive processing, suggesting higher complexity or ambiguity in the code, high fixation count suggesting low visual efficiency, increased scanning, suggesting cognitive strain in locating meaningful cues, short saccades indicating novice-like behavior and linear reading patterns, reflecting difficulty in identifying key code elements, increased pupil dilation reflecting high cognitive effort and mental workload. Improve the code.";

/// How the prompt of a session is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionMode {
    /// Prompt built from the metrics that crossed their thresholds.
    #[default]
    Realtime,
    /// Fixed prompt regardless of gaze.
    Preset,
}

impl FromStr for InteractionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "realtime" | "real-time" => Ok(InteractionMode::Realtime),
            "preset" | "pre-set" => Ok(InteractionMode::Preset),
            other => Err(format!("unknown mode `{other}` (expected realtime or preset)")),
        }
    }
}

impl fmt::Display for InteractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionMode::Realtime => "realtime",
            InteractionMode::Preset => "preset",
        })
    }
}

/// Which template produced a prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Realtime,
    Preset,
    /// Realtime with no triggered metric: the bare command.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptText {
    pub text: String,
    pub mode: PromptMode,
}

impl fmt::Display for PromptText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub fn synthesize_prompt(flags: &TriggerFlags, mode: InteractionMode) -> PromptText {
    if mode == InteractionMode::Preset {
        return PromptText {
            text: PRESET_PROMPT.to_string(),
            mode: PromptMode::Preset,
        };
    }
    let selected: Vec<&str> = flags
        .as_array()
        .iter()
        .zip(FRAGMENTS)
        .filter_map(|(on, fragment)| on.then_some(fragment))
        .collect();
    if selected.is_empty() {
        return PromptText {
            text: COMMAND.to_string(),
            mode: PromptMode::Fallback,
        };
    }
    PromptText {
        text: format!("{PROMPT_PREFIX}{}. {COMMAND}", selected.join(", ")),
        mode: PromptMode::Realtime,
    }
}

pub fn prompt_for_session(
    metrics: &GazeMetrics,
    config: &ThresholdConfig,
    mode: InteractionMode,
) -> (TriggerFlags, PromptText) {
    let flags = evaluate_thresholds(metrics, config);
    let prompt = synthesize_prompt(&flags, mode);
    (flags, prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG_REALTIME: &str = "While reading the code, the developer demonstrated long fixation durations, indicating sustained attention and deep cognitive processing, suggesting higher complexity or ambiguity in the code, increased pupil dilation reflecting high cognitive effort and mental workload. Improve the code.";

    #[test]
    fn duration_and_pupil_example() {
        let flags = TriggerFlags {
            long_fixation_duration: true,
            high_pupil_dilation: true,
            ..Default::default()
        };
        let p = synthesize_prompt(&flags, InteractionMode::Realtime);
        assert_eq!(p.text, FIG_REALTIME);
        assert_eq!(p.mode, PromptMode::Realtime);
    }

    #[test]
    fn preset_ignores_flags() {
        for bits in 0..16 {
            let p = synthesize_prompt(&TriggerFlags::from_bits(bits), InteractionMode::Preset);
            assert_eq!(p.text, PRESET_PROMPT);
            assert_eq!(p.mode, PromptMode::Preset);
        }
    }

    #[test]
    fn no_flags_falls_back_to_command() {
        let p = synthesize_prompt(&TriggerFlags::default(), InteractionMode::Realtime);
        assert_eq!(p.text, "Improve the code.");
        assert_eq!(p.mode, PromptMode::Fallback);
    }

    #[test]
    fn all_flags_match_preset_up_to_first_comma() {
        let p = synthesize_prompt(&TriggerFlags::ALL, InteractionMode::Realtime);
        assert_ne!(p.text, PRESET_PROMPT);
        assert_eq!(
            p.text.replacen("durations, indicating", "durations indicating", 1),
            PRESET_PROMPT
        );
    }

    #[test]
    fn single_duration_fragment() {
        let flags = TriggerFlags {
            long_fixation_duration: true,
            ..Default::default()
        };
        assert_eq!(
            synthesize_prompt(&flags, InteractionMode::Realtime).text,
            "While reading the code, the developer demonstrated long fixation durations, indicating sustained attention and deep cognitive processing, suggesting higher complexity or ambiguity in the code. Improve the code."
        );
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("Preset".parse::<InteractionMode>().unwrap(), InteractionMode::Preset);
        assert!("standard".parse::<InteractionMode>().is_err());
    }
}
