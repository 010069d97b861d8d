//! Chat-completion client over HTTP.
//!
//! Request body: `{"model": ..., "messages": [{"role": "user", "content": ...}]}`.
//! The reply text is read from `choices[0].message.content`.

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{CompletionBackend, LlmError};

pub const DEFAULT_TOKEN_ENV: &str = "GAZE_PROMPT_API_TOKEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpBackendConfig {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token. Unset or empty means no
    /// Authorization header.
    pub token_env: String,
    pub timeout_ms: u64,
    pub retries: u32,
    pub retry_backoff_ms: u64,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            token_env: DEFAULT_TOKEN_ENV.into(),
            timeout_ms: 30_000,
            retries: 2,
            retry_backoff_ms: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpChatBackend {
    config: HttpBackendConfig,
    token: Option<String>,
    client: reqwest::Client,
}

impl HttpChatBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, LlmError> {
        if config.timeout_ms == 0 {
            return Err(LlmError::Config("timeout_ms must be positive".into()));
        }
        reqwest::Url::parse(&config.endpoint)
            .map_err(|e| LlmError::Config(format!("endpoint `{}`: {e}", config.endpoint)))?;
        let token = std::env::var(&config.token_env).ok().filter(|t| !t.is_empty());
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(Self { config, token, client })
    }

    pub fn config(&self) -> &HttpBackendConfig {
        &self.config
    }

    async fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        let mut req = self.client.post(&self.config.endpoint).json(body);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().await.map_err(|e| Attempt::Retry(describe(&e)))?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(Attempt::Fatal(LlmError::Auth {
                status: status.as_u16(),
            }));
        }
        let text = resp.text().await.map_err(|e| Attempt::Retry(describe(&e)))?;
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(LlmError::Rejected {
                status: status.as_u16(),
                body: text,
            }));
        }
        let value: Value =
            serde_json::from_str(&text).map_err(|e| Attempt::Fatal(LlmError::MalformedReply(e.to_string())))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Attempt::Fatal(LlmError::MalformedReply("missing choices[0].message.content".into())))
    }
}

enum Attempt {
    Retry(String),
    Fatal(LlmError),
}

fn describe(e: &reqwest::Error) -> String {
    if e.is_timeout() {
        "request timed out".into()
    } else if e.is_connect() {
        format!("connection failed: {e}")
    } else {
        e.to_string()
    }
}

#[async_trait]
impl CompletionBackend for HttpChatBackend {
    fn name(&self) -> &str {
        "http"
    }

    async fn complete(&self, message: &str) -> Result<String, LlmError> {
        let body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": message}],
        });
        let attempts = self.config.retries + 1;
        let mut last = String::new();
        for n in 1..=attempts {
            match self.attempt(&body).await {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => last = msg,
            }
            if n < attempts && self.config.retry_backoff_ms > 0 {
                tokio::time::sleep(Duration::from_millis(self.config.retry_backoff_ms)).await;
            }
        }
        Err(LlmError::Transport {
            attempts,
            message: last,
        })
    }
}
