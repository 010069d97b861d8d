//! Sends a gaze-informed prompt together with the code under review to a
//! completion backend and pulls the refactored code out of the reply.

mod error;
pub mod http;
pub mod message;
pub mod mock;

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use gazeprompt_core::PromptText;

pub use error::LlmError;
pub use http::{HttpBackendConfig, HttpChatBackend};
pub use message::{build_message, extract_code};
pub use mock::{MockBackend, MockScript, ScriptEntry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefactorRequest {
    pub prompt: PromptText,
    pub source_code: String,
    pub language_hint: String,
    pub request_id: String,
}

impl RefactorRequest {
    pub fn message(&self) -> String {
        build_message(&self.prompt.text, &self.source_code, &self.language_hint)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefactorResponse {
    pub request_id: String,
    pub refactored_code: String,
    pub backend_name: String,
    pub latency_ms: f64,
    pub raw_model_message: String,
}

/// A chat-completion style backend: one user message in, one reply out.
#[async_trait]
pub trait CompletionBackend: Send + Sync {
    fn name(&self) -> &str;
    async fn complete(&self, message: &str) -> Result<String, LlmError>;
}

pub async fn refactor(
    request: &RefactorRequest,
    backend: &dyn CompletionBackend,
) -> Result<RefactorResponse, LlmError> {
    if request.source_code.is_empty() {
        return Err(LlmError::InvalidRequest("source code is empty".into()));
    }
    let started = Instant::now();
    let raw = backend.complete(&request.message()).await?;
    let latency_ms = started.elapsed().as_secs_f64() * 1000.0;
    match extract_code(&raw) {
        Some(refactored_code) => Ok(RefactorResponse {
            request_id: request.request_id.clone(),
            refactored_code,
            backend_name: backend.name().to_string(),
            latency_ms,
            raw_model_message: raw,
        }),
        None => Err(LlmError::NoCodeExtracted { raw_message: raw }),
    }
}

/// Backend selection as written in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendConfig {
    Mock {
        /// TOML script of canned replies, relative to the config file.
        #[serde(default)]
        script: Option<String>,
        #[serde(default)]
        down: bool,
    },
    Http(HttpBackendConfig),
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Mock {
            script: None,
            down: false,
        }
    }
}

impl BackendConfig {
    /// Builds the backend; relative script paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Arc<dyn CompletionBackend>, LlmError> {
        match self {
            BackendConfig::Mock { down: true, .. } => Ok(Arc::new(MockBackend::down())),
            BackendConfig::Mock { script: None, .. } => Ok(Arc::new(MockBackend::echo())),
            BackendConfig::Mock { script: Some(path), .. } => {
                let script = MockScript::load(&base_dir.join(path))?;
                Ok(Arc::new(MockBackend::scripted(script)))
            }
            BackendConfig::Http(config) => Ok(Arc::new(HttpChatBackend::new(config.clone())?)),
        }
    }
}
