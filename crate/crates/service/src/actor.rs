//! Per-session tasks and the registry routing requests to them.
//!
//! Each session is owned by one task that applies commands in arrival order,
//! journals the resulting frames and broadcasts them to subscribers. Backend
//! calls run on a separate task so a slow model does not block snapshots or
//! closing.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, mpsc, oneshot};

use gazeprompt_core::{EditorGeometry, GazeSample, InteractionMode, PromptText, TriggerFlags};
use gazeprompt_llm::{refactor, CompletionBackend, RefactorResponse};

use crate::config::ServiceConfig;
use crate::journal::{encode_frames, JournalWriter};
use crate::protocol::{Frame, Phase, SessionEvent, SessionSettings, SessionSnapshot};
use crate::session::{RefactorOutcome, Session, SessionError};

const COMMAND_QUEUE: usize = 256;
const BROADCAST_BUFFER: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    BadRequest,
    NotFound,
    Conflict,
    Unprocessable,
    BadGateway,
    Internal,
}

/// An error reported to a client, with a stable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub kind: ErrorKind,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(kind: ErrorKind, code: &str, message: impl Into<String>) -> Self {
        Self {
            kind,
            code: code.into(),
            message: message.into(),
        }
    }

    fn from_session(e: &SessionError) -> Self {
        let kind = match e {
            SessionError::WrongPhase { .. } => ErrorKind::Conflict,
            _ => ErrorKind::Unprocessable,
        };
        Self::new(kind, e.code(), e.to_string())
    }

    fn gone() -> Self {
        Self::new(ErrorKind::Internal, "session_unavailable", "session task stopped")
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

/// Request body for opening a session; absent fields take configured defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CreateSession {
    pub session_id: Option<String>,
    pub mode: Option<InteractionMode>,
    pub source_code: Option<String>,
    pub language_hint: Option<String>,
    pub geometry: Option<EditorGeometry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub phase: Phase,
    pub journal: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestAck {
    pub accepted: usize,
    pub sample_count: usize,
    pub next_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptReply {
    pub prompt: PromptText,
    pub flags: TriggerFlags,
}

type Reply<T> = oneshot::Sender<Result<T, ApiError>>;

enum Command {
    Ingest(Vec<GazeSample>, Reply<IngestAck>),
    Trigger(Option<InteractionMode>, Reply<PromptReply>),
    Confirm(Reply<RefactorResponse>),
    Geometry(EditorGeometry, Reply<SessionSnapshot>),
    Close(Reply<SessionSnapshot>),
    Snapshot(oneshot::Sender<SessionSnapshot>),
    Subscribe(oneshot::Sender<(Vec<Frame>, broadcast::Receiver<Frame>)>),
    History(oneshot::Sender<Vec<Frame>>),
}

#[derive(Clone)]
pub struct SessionHandle {
    tx: mpsc::Sender<Command>,
}

impl SessionHandle {
    async fn call<T>(&self, make: impl FnOnce(oneshot::Sender<T>) -> Command) -> Result<T, ApiError> {
        let (tx, rx) = oneshot::channel();
        self.tx.send(make(tx)).await.map_err(|_| ApiError::gone())?;
        rx.await.map_err(|_| ApiError::gone())
    }

    pub async fn ingest(&self, samples: Vec<GazeSample>) -> Result<IngestAck, ApiError> {
        self.call(|r| Command::Ingest(samples, r)).await?
    }

    pub async fn trigger(&self, mode: Option<InteractionMode>) -> Result<PromptReply, ApiError> {
        self.call(|r| Command::Trigger(mode, r)).await?
    }

    /// Resolves once the backend has answered or failed.
    pub async fn confirm(&self) -> Result<RefactorResponse, ApiError> {
        self.call(Command::Confirm).await?
    }

    pub async fn update_geometry(&self, geometry: EditorGeometry) -> Result<SessionSnapshot, ApiError> {
        self.call(|r| Command::Geometry(geometry, r)).await?
    }

    pub async fn close(&self) -> Result<SessionSnapshot, ApiError> {
        self.call(Command::Close).await?
    }

    pub async fn snapshot(&self) -> Result<SessionSnapshot, ApiError> {
        self.call(Command::Snapshot).await
    }

    /// Frames so far plus a receiver for every later one, with no gap between.
    pub async fn subscribe(&self) -> Result<(Vec<Frame>, broadcast::Receiver<Frame>), ApiError> {
        self.call(Command::Subscribe).await
    }

    pub async fn history(&self) -> Result<Vec<Frame>, ApiError> {
        self.call(Command::History).await
    }

    pub async fn log(&self) -> Result<String, ApiError> {
        Ok(encode_frames(&self.history().await?))
    }
}

struct Actor {
    session: Session,
    journal: JournalWriter,
    history: Vec<Frame>,
    events: broadcast::Sender<Frame>,
    backend: Arc<dyn CompletionBackend>,
    pending: Option<Reply<RefactorResponse>>,
    done_tx: mpsc::Sender<RefactorOutcome>,
}

impl Actor {
    fn publish(&mut self, frames: impl IntoIterator<Item = Frame>) {
        for frame in frames {
            if let Err(e) = self.journal.append(&frame) {
                tracing::error!(session = self.session.id(), "journal write failed: {e}");
            }
            let _ = self.events.send(frame.clone());
            self.history.push(frame);
        }
    }

    /// Applies an operation, publishing its frames or an error event.
    fn apply<T>(
        &mut self,
        op: impl FnOnce(&mut Session) -> Result<(Vec<Frame>, T), SessionError>,
    ) -> Result<T, ApiError> {
        match op(&mut self.session) {
            Ok((frames, value)) => {
                self.publish(frames);
                Ok(value)
            }
            Err(e) => {
                let err = ApiError::from_session(&e);
                let frame = self.session.error_frame(&err.code, &err.message);
                self.publish([frame]);
                Err(err)
            }
        }
    }

    fn handle(&mut self, command: Command) {
        match command {
            Command::Ingest(samples, reply) => {
                let result = self.apply(|s| {
                    let frames = s.ingest(&samples)?;
                    Ok((frames, samples.len()))
                });
                let ack = result.map(|accepted| IngestAck {
                    accepted,
                    sample_count: self.session.snapshot().sample_count,
                    next_seq: self.session.next_seq(),
                });
                let _ = reply.send(ack);
            }
            Command::Trigger(mode, reply) => {
                let result = self.apply(|s| {
                    let frames = s.trigger(mode)?;
                    let preview = frames.iter().find_map(|f| match &f.event {
                        SessionEvent::PromptPreview { prompt, flags } => Some(PromptReply {
                            prompt: prompt.clone(),
                            flags: *flags,
                        }),
                        _ => None,
                    });
                    Ok((frames, preview.expect("trigger emits a preview")))
                });
                let _ = reply.send(result);
            }
            Command::Confirm(reply) => {
                match self.apply(|s| s.begin_refactor().map(|(req, frame)| (vec![frame], req))) {
                    Ok(request) => {
                        self.pending = Some(reply);
                        let backend = self.backend.clone();
                        let done = self.done_tx.clone();
                        tokio::spawn(async move {
                            let outcome = RefactorOutcome::from(refactor(&request, backend.as_ref()).await);
                            let _ = done.send(outcome).await;
                        });
                    }
                    Err(e) => {
                        let _ = reply.send(Err(e));
                    }
                }
            }
            Command::Geometry(geometry, reply) => {
                let result = self.apply(|s| s.update_geometry(geometry).map(|f| (vec![f], ())));
                let _ = reply.send(result.map(|_| self.session.snapshot()));
            }
            Command::Close(reply) => {
                let result = self.apply(|s| s.close().map(|f| (vec![f], ())));
                if result.is_ok() {
                    if let Some(pending) = self.pending.take() {
                        let _ = pending.send(Err(ApiError::new(
                            ErrorKind::Conflict,
                            "session_closed",
                            "session closed while refactoring",
                        )));
                    }
                }
                let _ = reply.send(result.map(|_| self.session.snapshot()));
            }
            Command::Snapshot(reply) => {
                let _ = reply.send(self.session.snapshot());
            }
            Command::Subscribe(reply) => {
                let _ = reply.send((self.history.clone(), self.events.subscribe()));
            }
            Command::History(reply) => {
                let _ = reply.send(self.history.clone());
            }
        }
    }

    fn finish(&mut self, outcome: RefactorOutcome) {
        // A session closed mid-call has already answered the caller.
        if self.session.phase() != Phase::Refactoring {
            return;
        }
        let result = match &outcome {
            RefactorOutcome::Done(resp) => Ok(resp.clone()),
            RefactorOutcome::Failed { code, message } => {
                Err(ApiError::new(ErrorKind::BadGateway, code, message.clone()))
            }
        };
        match self.session.finish_refactor(outcome) {
            Ok(frame) => self.publish([frame]),
            Err(e) => tracing::error!(session = self.session.id(), "finishing refactor: {e}"),
        }
        if let Some(reply) = self.pending.take() {
            let _ = reply.send(result);
        }
    }

    async fn run(mut self, mut commands: mpsc::Receiver<Command>, mut done: mpsc::Receiver<RefactorOutcome>) {
        loop {
            tokio::select! {
                Some(outcome) = done.recv() => self.finish(outcome),
                command = commands.recv() => match command {
                    Some(c) => self.handle(c),
                    None => break,
                },
            }
        }
    }
}

/// All live sessions of one service instance.
pub struct Registry {
    config: Arc<ServiceConfig>,
    backend: Arc<dyn CompletionBackend>,
    sessions: Mutex<HashMap<String, SessionHandle>>,
    counter: AtomicU64,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Registry {
    pub fn new(config: ServiceConfig, backend: Arc<dyn CompletionBackend>) -> Self {
        Self {
            config: Arc::new(config),
            backend,
            sessions: Mutex::new(HashMap::new()),
            counter: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(ErrorKind::NotFound, "unknown_session", format!("no session `{id}`")))
    }

    fn settings_for(&self, req: &CreateSession) -> Result<SessionSettings, ApiError> {
        let defaults = &self.config.session;
        let source_code = match (&req.source_code, &defaults.snippet) {
            (Some(code), _) => code.clone(),
            (None, Some(path)) => {
                let path = self.config.resolve(path);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    ApiError::new(
                        ErrorKind::Unprocessable,
                        "unreadable_snippet",
                        format!("{}: {e}", path.display()),
                    )
                })?;
                // Columns count character cells, so tabs become spaces here.
                gazeprompt_core::codemap::expand_tabs(&text)
            }
            (None, None) => String::new(),
        };
        Ok(SessionSettings {
            mode: req.mode.unwrap_or(defaults.mode),
            geometry: req.geometry.clone().unwrap_or_else(|| defaults.geometry.clone()),
            thresholds: self.config.thresholds.clone(),
            fixation: self.config.fixation.clone(),
            snapshot_period_ms: self.config.snapshot_period_ms,
            language_hint: req
                .language_hint
                .clone()
                .unwrap_or_else(|| defaults.language_hint.clone()),
            source_code,
        })
    }

    pub fn create(&self, req: CreateSession) -> Result<SessionInfo, ApiError> {
        let settings = self.settings_for(&req)?;
        let log_dir = self.config.log_dir();
        let mut sessions = self.sessions.lock().unwrap();
        let (id, journal) = match &req.session_id {
            Some(id) => {
                if !valid_id(id) {
                    return Err(ApiError::new(
                        ErrorKind::BadRequest,
                        "invalid_session_id",
                        "session ids use letters, digits, '-' and '_'",
                    ));
                }
                if sessions.contains_key(id) {
                    return Err(ApiError::new(
                        ErrorKind::Conflict,
                        "session_exists",
                        format!("`{id}` exists"),
                    ));
                }
                let journal = JournalWriter::create(&log_dir.join(format!("{id}.jsonl")))
                    .map_err(|e| ApiError::new(ErrorKind::Conflict, "session_exists", e.to_string()))?;
                (id.clone(), journal)
            }
            None => loop {
                let n = self.counter.fetch_add(1, Ordering::SeqCst) + 1;
                let id = format!("session-{n}");
                if sessions.contains_key(&id) {
                    continue;
                }
                let path = log_dir.join(format!("{id}.jsonl"));
                if path.exists() {
                    continue;
                }
                let journal = JournalWriter::create(&path)
                    .map_err(|e| ApiError::new(ErrorKind::Internal, "journal_unavailable", e.to_string()))?;
                break (id, journal);
            },
        };
        let journal_path = journal.path().to_path_buf();
        let (session, opened) = match Session::open(&id, settings) {
            Ok(v) => v,
            Err(e) => {
                let _ = std::fs::remove_file(&journal_path);
                return Err(ApiError::from_session(&e));
            }
        };
        let (tx, rx) = mpsc::channel(COMMAND_QUEUE);
        let (done_tx, done_rx) = mpsc::channel(1);
        let (events, _) = broadcast::channel(BROADCAST_BUFFER);
        let mut actor = Actor {
            session,
            journal,
            history: Vec::new(),
            events,
            backend: self.backend.clone(),
            pending: None,
            done_tx,
        };
        actor.publish([opened]);
        tokio::spawn(actor.run(rx, done_rx));
        sessions.insert(id.clone(), SessionHandle { tx });
        tracing::info!(session = %id, journal = %journal_path.display(), "session opened");
        Ok(SessionInfo {
            session_id: id,
            phase: Phase::Reading,
            journal: journal_path.display().to_string(),
        })
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.lock().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }
}
