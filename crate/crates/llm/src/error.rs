use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// Connection failures, timeouts and retryable server errors, after all
    /// attempts were used.
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication failed (HTTP {status})")]
    Auth { status: u16 },
    #[error("backend rejected the request (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed backend reply: {0}")]
    MalformedReply(String),
    /// The reply carried no fenced code block. The raw message is kept so it
    /// can be shown to the user.
    #[error("no code extracted from reply")]
    NoCodeExtracted { raw_message: String },
    #[error("backend configuration: {0}")]
    Config(String),
}

impl LlmError {
    /// Stable identifier used in error events.
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::InvalidRequest(_) => "invalid_request",
            LlmError::Transport { .. } => "backend_unavailable",
            LlmError::Auth { .. } => "backend_auth",
            LlmError::Rejected { .. } => "backend_rejected",
            LlmError::MalformedReply(_) => "backend_malformed_reply",
            LlmError::NoCodeExtracted { .. } => "no_code_extracted",
            LlmError::Config(_) => "backend_config",
        }
    }
}
