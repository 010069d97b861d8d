//! Append-only JSONL session journals and their replay.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use gazeprompt_core::{GazeRecording, GazeSample, PromptText, RecordingHeader};

use crate::protocol::{Frame, SessionEvent};
use crate::session::{RefactorOutcome, Session, SessionError};

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("journal is empty")]
    Empty,
    #[error("journal must start with session_opened, found {0}")]
    NotOpened(&'static str),
    #[error("seq {seq}: replay rejected {kind}: {source}")]
    Rejected {
        seq: u64,
        kind: &'static str,
        #[source]
        source: SessionError,
    },
    #[error("seq {seq}: {kind} is produced by the session and cannot drive a replay")]
    Unexpected { seq: u64, kind: &'static str },
    #[error("seq {seq}: replayed frame differs\n  logged:   {logged}\n  replayed: {replayed}")]
    Mismatch { seq: u64, logged: String, replayed: String },
    #[error("journal ends in the middle of seq {0}'s output")]
    Truncated(u64),
}

pub struct JournalWriter {
    file: File,
    path: PathBuf,
}

impl JournalWriter {
    /// Creates a new journal; an existing file is never overwritten.
    pub fn create(path: &Path) -> Result<Self, JournalError> {
        let io = |source| JournalError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let file = OpenOptions::new().write(true).create_new(true).open(path).map_err(io)?;
        Ok(Self {
            file,
            path: path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one frame as a complete line.
    pub fn append(&mut self, frame: &Frame) -> Result<(), JournalError> {
        let mut line = serde_json::to_vec(frame).expect("frames serialize");
        line.push(b'\n');
        self.file.write_all(&line).map_err(|source| JournalError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

pub fn encode_frames(frames: &[Frame]) -> String {
    let mut out = String::new();
    for f in frames {
        out.push_str(&serde_json::to_string(f).expect("frames serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_journal<R: BufRead>(reader: R) -> Result<Vec<Frame>, JournalError> {
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| JournalError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let frame = serde_json::from_str(&line).map_err(|e| JournalError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        frames.push(frame);
    }
    Ok(frames)
}

pub fn read_journal(path: &Path) -> Result<Vec<Frame>, JournalError> {
    let file = File::open(path).map_err(|source| JournalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_journal(BufReader::new(file))
}

/// A session rebuilt from its journal.
#[derive(Debug, Clone)]
pub struct Replayed {
    pub session: Session,
    pub prompts: Vec<PromptText>,
    pub frames: usize,
}

impl Replayed {
    /// Every accepted sample, as a standalone recording.
    pub fn recording(&self, frames: &[Frame]) -> GazeRecording {
        let g = &self.session.settings().geometry;
        let header = RecordingHeader {
            session_id: self.session.id().to_string(),
            screen_width_px: g.screen_width_px,
            screen_height_px: g.screen_height_px,
            ..Default::default()
        };
        GazeRecording::new(header, logged_samples(frames)).expect("journaled samples were validated")
    }
}

pub fn logged_samples(frames: &[Frame]) -> Vec<GazeSample> {
    frames
        .iter()
        .filter_map(|f| match &f.event {
            SessionEvent::SampleBatch { samples } => Some(samples.clone()),
            _ => None,
        })
        .flatten()
        .collect()
}

/// Re-drives a fresh session with the journal's inputs and checks that it
/// produces the logged frames byte for byte.
pub fn replay_journal(frames: &[Frame]) -> Result<Replayed, JournalError> {
    let first = frames.first().ok_or(JournalError::Empty)?;
    let SessionEvent::SessionOpened { settings } = &first.event else {
        return Err(JournalError::NotOpened(first.event.kind()));
    };
    let (mut session, opened) =
        Session::open(&first.session_id, settings.clone()).map_err(|source| JournalError::Rejected {
            seq: first.seq,
            kind: "session_opened",
            source,
        })?;
    compare(first, &opened)?;
    let mut prompts = Vec::new();
    let mut i = 1;
    while i < frames.len() {
        let logged = &frames[i];
        let kind = logged.event.kind();
        let rejected = |source| JournalError::Rejected {
            seq: logged.seq,
            kind,
            source,
        };
        let produced: Vec<Frame> = match &logged.event {
            SessionEvent::SampleBatch { samples } => session.ingest(samples).map_err(rejected)?,
            SessionEvent::GeometryUpdate { geometry } => {
                vec![session.update_geometry(geometry.clone()).map_err(rejected)?]
            }
            SessionEvent::TriggerPrompt { mode } => session.trigger(*mode).map_err(rejected)?,
            SessionEvent::RefactorStarted { .. } => vec![session.begin_refactor().map_err(rejected)?.1],
            SessionEvent::RefactorResult { response } => vec![session
                .finish_refactor(RefactorOutcome::Done(response.clone()))
                .map_err(rejected)?],
            SessionEvent::Error { code, message } => {
                if session.phase() == crate::protocol::Phase::Refactoring {
                    vec![session
                        .finish_refactor(RefactorOutcome::Failed {
                            code: code.clone(),
                            message: message.clone(),
                        })
                        .map_err(rejected)?]
                } else {
                    vec![session.error_frame(code, message)]
                }
            }
            SessionEvent::SessionClosed => vec![session.close().map_err(rejected)?],
            SessionEvent::SessionOpened { .. }
            | SessionEvent::MetricsUpdate { .. }
            | SessionEvent::PromptPreview { .. } => return Err(JournalError::Unexpected { seq: logged.seq, kind }),
        };
        if i + produced.len() > frames.len() {
            return Err(JournalError::Truncated(logged.seq));
        }
        for (want, got) in frames[i..].iter().zip(&produced) {
            compare(want, got)?;
            if let SessionEvent::PromptPreview { prompt, .. } = &got.event {
                prompts.push(prompt.clone());
            }
        }
        i += produced.len();
    }
    Ok(Replayed {
        session,
        prompts,
        frames: frames.len(),
    })
}

fn compare(logged: &Frame, replayed: &Frame) -> Result<(), JournalError> {
    let a = serde_json::to_string(logged).expect("frames serialize");
    let b = serde_json::to_string(replayed).expect("frames serialize");
    if a == b {
        Ok(())
    } else {
        Err(JournalError::Mismatch {
            seq: logged.seq,
            logged: a,
            replayed: b,
        })
    }
}
