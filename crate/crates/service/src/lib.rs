//! Live gaze sessions.
//!
//! A session ingests gaze samples, keeps cumulative metrics up to date, turns
//! them into a prompt when the reader asks for one, and sends that prompt with
//! the code to a completion backend once confirmed. Everything a session does
//! is journaled as JSON frames that can be replayed to the same bytes.

pub mod actor;
pub mod config;
pub mod http;
pub mod journal;
pub mod protocol;
pub mod session;

use std::sync::Arc;

pub use actor::{ApiError, CreateSession, ErrorKind, IngestAck, PromptReply, Registry, SessionHandle, SessionInfo};
pub use config::{ConfigFileError, ServiceConfig, SessionDefaults};
pub use journal::{read_journal, replay_journal, JournalError, Replayed};
pub use protocol::{Frame, Phase, SessionEvent, SessionSettings, SessionSnapshot, PROTOCOL_VERSION};
pub use session::{RefactorOutcome, Session, SessionError};

/// Builds the configured backend and a registry around it.
pub fn registry_from_config(config: ServiceConfig) -> Result<Registry, gazeprompt_llm::LlmError> {
    let backend = config.backend.build(&config.base_dir)?;
    Ok(Registry::new(config, backend))
}

/// Registry with an explicit backend, for embedding and tests.
pub fn registry_with_backend(config: ServiceConfig, backend: Arc<dyn gazeprompt_llm::CompletionBackend>) -> Registry {
    Registry::new(config, backend)
}
