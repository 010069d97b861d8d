//! One session's state machine.
//!
//! Phases only move forward (reading, prompt_ready, refactoring, refactored)
//! except that a failed refactoring returns to prompt_ready. Any phase can be
//! closed. Every accepted operation yields the frames it produced; a rejected
//! one changes nothing and the caller decides whether to report it with
//! [`Session::error_frame`].

use thiserror::Error;

use gazeprompt_core::sample::check_samples;
use gazeprompt_core::{
    evaluate_thresholds, line_summaries, prompt_for_session, ConfigError, EditorGeometry, GazeMetrics, GazeSample,
    InteractionMode, MetricsError, PromptText, RecordingError, SessionWindow, TriggerFlags,
};
use gazeprompt_llm::{LlmError, RefactorRequest, RefactorResponse};

use crate::protocol::{Frame, Phase, SessionEvent, SessionSettings, SessionSnapshot, PROTOCOL_VERSION};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("`{op}` is not allowed in phase {phase}")]
    WrongPhase { op: &'static str, phase: Phase },
    #[error("rejected samples: {0}")]
    Samples(#[from] RecordingError),
    #[error("insufficient data: {0}")]
    Metrics(#[from] MetricsError),
    #[error("invalid settings: {0}")]
    Settings(#[from] ConfigError),
    #[error("source code is empty")]
    MissingSource,
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::WrongPhase { .. } => "wrong_phase",
            SessionError::Samples(RecordingError::NonMonotonic { .. }) => "nonmonotonic_timestamps",
            SessionError::Samples(_) => "invalid_samples",
            SessionError::Metrics(_) => "insufficient_data",
            SessionError::Settings(_) => "invalid_settings",
            SessionError::MissingSource => "missing_source",
        }
    }
}

/// How a backend call ended, as recorded in the journal.
#[derive(Debug, Clone, PartialEq)]
pub enum RefactorOutcome {
    Done(RefactorResponse),
    Failed { code: String, message: String },
}

impl From<Result<RefactorResponse, LlmError>> for RefactorOutcome {
    fn from(result: Result<RefactorResponse, LlmError>) -> Self {
        match result {
            Ok(resp) => RefactorOutcome::Done(resp),
            Err(LlmError::NoCodeExtracted { raw_message }) => RefactorOutcome::Failed {
                code: "no_code_extracted".into(),
                message: format!("no code extracted; raw reply follows\n{raw_message}"),
            },
            Err(e) => RefactorOutcome::Failed {
                code: e.code().into(),
                message: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    settings: SessionSettings,
    phase: Phase,
    window: SessionWindow,
    next_seq: u64,
    last_update_us: Option<u64>,
    prompt: Option<PromptText>,
    response: Option<RefactorResponse>,
    requests: u32,
}

impl Session {
    /// Validates `settings` and returns the session with its opening frame.
    pub fn open(id: &str, settings: SessionSettings) -> Result<(Self, Frame), SessionError> {
        settings.geometry.validate()?;
        settings.thresholds.validate()?;
        settings.fixation.validate()?;
        if settings.source_code.is_empty() {
            return Err(SessionError::MissingSource);
        }
        let window = SessionWindow::new(
            settings.fixation.clone(),
            settings.geometry.screen_width_px,
            settings.geometry.screen_height_px,
        );
        let mut session = Self {
            id: id.to_string(),
            settings: settings.clone(),
            phase: Phase::Reading,
            window,
            next_seq: 0,
            last_update_us: None,
            prompt: None,
            response: None,
            requests: 0,
        };
        let frame = session.emit(SessionEvent::SessionOpened { settings });
        Ok((session, frame))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn settings(&self) -> &SessionSettings {
        &self.settings
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn prompt(&self) -> Option<&PromptText> {
        self.prompt.as_ref()
    }

    fn emit(&mut self, event: SessionEvent) -> Frame {
        let frame = Frame {
            protocol_version: PROTOCOL_VERSION,
            session_id: self.id.clone(),
            seq: self.next_seq,
            phase: self.phase,
            event,
        };
        self.next_seq += 1;
        frame
    }

    fn require(&self, op: &'static str, allowed: &[Phase]) -> Result<(), SessionError> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(SessionError::WrongPhase { op, phase: self.phase })
        }
    }

    /// Reports a rejected operation as an error event.
    pub fn error_frame(&mut self, code: &str, message: &str) -> Frame {
        self.emit(SessionEvent::Error {
            code: code.into(),
            message: message.into(),
        })
    }

    fn metrics_update(&mut self, metrics: GazeMetrics) -> Frame {
        let flags = evaluate_thresholds(&metrics, &self.settings.thresholds);
        let lines = line_summaries(&self.window.fixations(), &self.settings.geometry);
        let stream_time_us = self.window.last_timestamp_us().unwrap_or(0);
        self.last_update_us = Some(stream_time_us);
        self.emit(SessionEvent::MetricsUpdate {
            metrics,
            flags,
            sample_count: self.window.sample_count(),
            stream_time_us,
            lines,
        })
    }

    /// Appends a batch. A metrics update follows when at least one snapshot
    /// period of stream time has passed since the previous one.
    pub fn ingest(&mut self, samples: &[GazeSample]) -> Result<Vec<Frame>, SessionError> {
        self.require("ingest", &[Phase::Reading])?;
        if samples.is_empty() {
            return Ok(Vec::new());
        }
        check_samples(samples, self.window.last_timestamp_us())?;
        self.window.extend(samples);
        let mut frames = vec![self.emit(SessionEvent::SampleBatch {
            samples: samples.to_vec(),
        })];
        let now = self.window.last_timestamp_us().unwrap_or(0);
        let period_us = self.settings.snapshot_period_ms * 1000;
        let due = self.last_update_us.is_none_or(|t| now - t >= period_us);
        if due {
            if let Ok(metrics) = self.window.snapshot() {
                frames.push(self.metrics_update(metrics));
            }
        }
        Ok(frames)
    }

    /// Human trigger: fresh metrics over everything received, then the prompt.
    pub fn trigger(&mut self, mode: Option<InteractionMode>) -> Result<Vec<Frame>, SessionError> {
        self.require("trigger", &[Phase::Reading])?;
        let metrics = self.window.snapshot()?;
        let (flags, prompt) =
            prompt_for_session(&metrics, &self.settings.thresholds, mode.unwrap_or(self.settings.mode));
        let mut frames = vec![self.emit(SessionEvent::TriggerPrompt { mode })];
        frames.push(self.metrics_update(metrics));
        self.phase = Phase::PromptReady;
        self.prompt = Some(prompt.clone());
        frames.push(self.emit(SessionEvent::PromptPreview { prompt, flags }));
        Ok(frames)
    }

    /// Confirms the previewed prompt; the returned request goes to the backend.
    pub fn begin_refactor(&mut self) -> Result<(RefactorRequest, Frame), SessionError> {
        self.require("confirm", &[Phase::PromptReady])?;
        let prompt = self.prompt.clone().expect("prompt_ready implies a prompt");
        self.requests += 1;
        let request = RefactorRequest {
            prompt,
            source_code: self.settings.source_code.clone(),
            language_hint: self.settings.language_hint.clone(),
            request_id: format!("{}-r{}", self.id, self.requests),
        };
        self.phase = Phase::Refactoring;
        let frame = self.emit(SessionEvent::RefactorStarted {
            request_id: request.request_id.clone(),
        });
        Ok((request, frame))
    }

    pub fn finish_refactor(&mut self, outcome: RefactorOutcome) -> Result<Frame, SessionError> {
        self.require("finish_refactor", &[Phase::Refactoring])?;
        Ok(match outcome {
            RefactorOutcome::Done(response) => {
                self.phase = Phase::Refactored;
                self.response = Some(response.clone());
                self.emit(SessionEvent::RefactorResult { response })
            }
            RefactorOutcome::Failed { code, message } => {
                self.phase = Phase::PromptReady;
                self.emit(SessionEvent::Error { code, message })
            }
        })
    }

    /// Scroll or layout change. The screen itself cannot change mid-session.
    pub fn update_geometry(&mut self, geometry: EditorGeometry) -> Result<Frame, SessionError> {
        self.require(
            "geometry",
            &[
                Phase::Reading,
                Phase::PromptReady,
                Phase::Refactoring,
                Phase::Refactored,
            ],
        )?;
        geometry.validate()?;
        let old = &self.settings.geometry;
        if (geometry.screen_width_px, geometry.screen_height_px) != (old.screen_width_px, old.screen_height_px) {
            return Err(ConfigError::Geometry("screen size cannot change during a session".into()).into());
        }
        self.settings.geometry = geometry.clone();
        Ok(self.emit(SessionEvent::GeometryUpdate { geometry }))
    }

    pub fn close(&mut self) -> Result<Frame, SessionError> {
        self.require(
            "close",
            &[
                Phase::Reading,
                Phase::PromptReady,
                Phase::Refactoring,
                Phase::Refactored,
            ],
        )?;
        self.phase = Phase::Closed;
        Ok(self.emit(SessionEvent::SessionClosed))
    }

    /// Metrics over every sample received so far.
    pub fn current_metrics(&self) -> Result<(GazeMetrics, TriggerFlags), MetricsError> {
        let metrics = self.window.snapshot()?;
        let flags = evaluate_thresholds(&metrics, &self.settings.thresholds);
        Ok((metrics, flags))
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        let current = self.current_metrics().ok();
        let fixations = self.window.fixations();
        SessionSnapshot {
            session_id: self.id.clone(),
            phase: self.phase,
            mode: self.settings.mode,
            sample_count: self.window.sample_count(),
            last_timestamp_us: self.window.last_timestamp_us(),
            metrics: current.as_ref().map(|c| c.0.clone()),
            flags: current.map(|c| c.1),
            fixation_count: fixations.len(),
            lines: line_summaries(&fixations, &self.settings.geometry),
            geometry: self.settings.geometry.clone(),
            prompt: self.prompt.clone(),
            response: self.response.clone(),
            next_seq: self.next_seq,
        }
    }
}
