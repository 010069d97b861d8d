//! JSON frames exchanged with clients and written to session journals.
//!
//! Every session event travels in a [`Frame`] envelope carrying the protocol
//! version, the session id, a per-session sequence number and the phase after
//! the event. The journal is the same frames, one per line.

use std::fmt;

use serde::{Deserialize, Serialize};

use gazeprompt_core::{
    EditorGeometry, FixationConfig, GazeMetrics, GazeSample, InteractionMode, LineGazeSummary, PromptText,
    ThresholdConfig, TriggerFlags,
};
use gazeprompt_llm::RefactorResponse;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Reading,
    PromptReady,
    Refactoring,
    Refactored,
    Closed,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Reading => "reading",
            Phase::PromptReady => "prompt_ready",
            Phase::Refactoring => "refactoring",
            Phase::Refactored => "refactored",
            Phase::Closed => "closed",
        })
    }
}

/// Everything a session needs to reproduce its computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSettings {
    pub mode: InteractionMode,
    pub geometry: EditorGeometry,
    pub thresholds: ThresholdConfig,
    pub fixation: FixationConfig,
    pub snapshot_period_ms: u64,
    pub language_hint: String,
    pub source_code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    SessionOpened {
        settings: SessionSettings,
    },
    SampleBatch {
        samples: Vec<GazeSample>,
    },
    MetricsUpdate {
        metrics: GazeMetrics,
        flags: TriggerFlags,
        sample_count: usize,
        stream_time_us: u64,
        lines: Vec<LineGazeSummary>,
    },
    GeometryUpdate {
        geometry: EditorGeometry,
    },
    TriggerPrompt {
        mode: Option<InteractionMode>,
    },
    PromptPreview {
        prompt: PromptText,
        flags: TriggerFlags,
    },
    RefactorStarted {
        request_id: String,
    },
    RefactorResult {
        response: RefactorResponse,
    },
    Error {
        code: String,
        message: String,
    },
    SessionClosed,
}

impl SessionEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            SessionEvent::SessionOpened { .. } => "session_opened",
            SessionEvent::SampleBatch { .. } => "sample_batch",
            SessionEvent::MetricsUpdate { .. } => "metrics_update",
            SessionEvent::GeometryUpdate { .. } => "geometry_update",
            SessionEvent::TriggerPrompt { .. } => "trigger_prompt",
            SessionEvent::PromptPreview { .. } => "prompt_preview",
            SessionEvent::RefactorStarted { .. } => "refactor_started",
            SessionEvent::RefactorResult { .. } => "refactor_result",
            SessionEvent::Error { .. } => "error",
            SessionEvent::SessionClosed => "session_closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub protocol_version: u32,
    pub session_id: String,
    pub seq: u64,
    /// Phase after the event took effect.
    pub phase: Phase,
    #[serde(flatten)]
    pub event: SessionEvent,
}

/// Commands a client may send over the event channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientCommand {
    Samples {
        samples: Vec<GazeSample>,
    },
    Trigger {
        #[serde(default)]
        mode: Option<InteractionMode>,
    },
    Confirm,
    Geometry {
        geometry: EditorGeometry,
    },
    Close,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientFrame {
    pub protocol_version: u32,
    #[serde(flatten)]
    pub command: ClientCommand,
}

/// Replies that concern one connection only; they carry no sequence number
/// and are not journaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConnectionMessage {
    ProtocolError {
        protocol_version: u32,
        code: String,
        message: String,
    },
    Snapshot {
        protocol_version: u32,
        snapshot: Box<SessionSnapshot>,
    },
}

impl ConnectionMessage {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        ConnectionMessage::ProtocolError {
            protocol_version: PROTOCOL_VERSION,
            code: code.into(),
            message: message.into(),
        }
    }
}

/// Parses a client frame, rejecting other protocol versions.
pub fn parse_client_frame(text: &str) -> Result<ClientCommand, ConnectionMessage> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConnectionMessage::error("malformed_frame", e.to_string()))?;
    match value.get("protocol_version").and_then(|v| v.as_u64()) {
        Some(v) if v == PROTOCOL_VERSION as u64 => {}
        Some(v) => {
            return Err(ConnectionMessage::error(
                "unsupported_protocol_version",
                format!("server speaks version {PROTOCOL_VERSION}, frame has {v}"),
            ))
        }
        None => return Err(ConnectionMessage::error("malformed_frame", "missing protocol_version")),
    }
    serde_json::from_value::<ClientFrame>(value)
        .map(|f| f.command)
        .map_err(|e| ConnectionMessage::error("malformed_frame", e.to_string()))
}

/// Current state of a session as returned by the snapshot endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub session_id: String,
    pub phase: Phase,
    pub mode: InteractionMode,
    pub sample_count: usize,
    pub last_timestamp_us: Option<u64>,
    /// Absent until two samples have arrived.
    pub metrics: Option<GazeMetrics>,
    pub flags: Option<TriggerFlags>,
    pub fixation_count: usize,
    pub lines: Vec<LineGazeSummary>,
    pub geometry: EditorGeometry,
    pub prompt: Option<PromptText>,
    pub response: Option<RefactorResponse>,
    pub next_seq: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_layout_is_flat() {
        let frame = Frame {
            protocol_version: PROTOCOL_VERSION,
            session_id: "s".into(),
            seq: 3,
            phase: Phase::Reading,
            event: SessionEvent::TriggerPrompt { mode: None },
        };
        let text = serde_json::to_string(&frame).unwrap();
        assert_eq!(
            text,
            r#"{"protocol_version":1,"session_id":"s","seq":3,"phase":"reading","type":"trigger_prompt","mode":null}"#
        );
        assert_eq!(serde_json::from_str::<Frame>(&text).unwrap(), frame);
    }

    #[test]
    fn unit_events_round_trip() {
        let frame = Frame {
            protocol_version: 1,
            session_id: "s".into(),
            seq: 9,
            phase: Phase::Closed,
            event: SessionEvent::SessionClosed,
        };
        let text = serde_json::to_string(&frame).unwrap();
        assert!(text.ends_with(r#""type":"session_closed"}"#));
        assert_eq!(serde_json::from_str::<Frame>(&text).unwrap(), frame);
    }

    #[test]
    fn client_frames() {
        assert_eq!(
            parse_client_frame(r#"{"protocol_version":1,"type":"trigger"}"#).unwrap(),
            ClientCommand::Trigger { mode: None }
        );
        assert_eq!(
            parse_client_frame(r#"{"protocol_version":1,"type":"trigger","mode":"preset"}"#).unwrap(),
            ClientCommand::Trigger {
                mode: Some(InteractionMode::Preset)
            }
        );
        assert_eq!(
            parse_client_frame(r#"{"protocol_version":1,"type":"confirm"}"#).unwrap(),
            ClientCommand::Confirm
        );
        let code = |text: &str| match parse_client_frame(text) {
            Err(ConnectionMessage::ProtocolError { code, .. }) => code,
            other => panic!("{other:?}"),
        };
        assert_eq!(code("{not json"), "malformed_frame");
        assert_eq!(code(r#"{"type":"confirm"}"#), "malformed_frame");
        assert_eq!(
            code(r#"{"protocol_version":2,"type":"confirm"}"#),
            "unsupported_protocol_version"
        );
        assert_eq!(code(r#"{"protocol_version":1,"type":"dance"}"#), "malformed_frame");
    }
}
