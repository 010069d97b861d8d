//! Blocking HTTP client that streams a recording into a live session.

use std::time::Duration;

use reqwest::blocking::{Client, Response};
use serde::Serialize;
use serde_json::{json, Value};

use gazeprompt_core::{replay, EditorGeometry, GazeRecording, GazeSample, InteractionMode, ReplayError};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct ReplayPlan {
    pub target: String,
    pub speed: f64,
    pub batch: usize,
    pub session_id: Option<String>,
    pub mode: Option<InteractionMode>,
    pub source_code: Option<String>,
    pub geometry: EditorGeometry,
    pub trigger: bool,
    pub confirm: bool,
    pub close: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayOutcome {
    pub session_id: String,
    pub journal: String,
    pub samples_sent: usize,
    pub requests: usize,
    /// Session snapshot after the last batch.
    pub snapshot: Value,
    pub prompt: Option<Value>,
    pub refactor: Option<Value>,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct SendError(String);

struct Api {
    client: Client,
    base: String,
}

impl Api {
    fn new(target: &str) -> Result<Self, CliError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| CliError::Data(format!("http client: {e}")))?;
        Ok(Self {
            client,
            base: target.trim_end_matches('/').to_string(),
        })
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, String> {
        let resp = self
            .client
            .post(self.url(path))
            .json(body)
            .send()
            .map_err(|e| format!("{}: {e}", self.url(path)))?;
        decode(resp)
    }

    fn get(&self, path: &str) -> Result<Value, String> {
        let resp = self
            .client
            .get(self.url(path))
            .send()
            .map_err(|e| format!("{}: {e}", self.url(path)))?;
        decode(resp)
    }
}

fn decode(resp: Response) -> Result<Value, String> {
    let status = resp.status();
    let text = resp.text().map_err(|e| e.to_string())?;
    let value: Value = serde_json::from_str(&text).unwrap_or(Value::String(text));
    if status.is_success() {
        return Ok(value);
    }
    match value.pointer("/error") {
        Some(err) => Err(format!(
            "{status}: {} ({})",
            err["message"].as_str().unwrap_or_default(),
            err["code"].as_str().unwrap_or("error")
        )),
        None => Err(format!("{status}: {value}")),
    }
}

/// Creates a session, streams every sample in batches, and optionally
/// triggers and confirms the prompt.
pub fn run_replay(rec: &GazeRecording, plan: &ReplayPlan) -> Result<ReplayOutcome, CliError> {
    let api = Api::new(&plan.target)?;
    let mut geometry = plan.geometry.clone();
    geometry.screen_width_px = rec.screen_width_px;
    geometry.screen_height_px = rec.screen_height_px;
    let created = api
        .post(
            "/sessions",
            &json!({
                "session_id": plan.session_id,
                "mode": plan.mode,
                "source_code": plan.source_code,
                "geometry": geometry,
            }),
        )
        .map_err(CliError::Data)?;
    let session_id = created["session_id"].as_str().unwrap_or_default().to_string();
    let journal = created["journal"].as_str().unwrap_or_default().to_string();
    let samples_path = format!("/sessions/{session_id}/samples");

    let mut pending: Vec<GazeSample> = Vec::with_capacity(plan.batch);
    let mut requests = 0;
    let mut flush = |pending: &mut Vec<GazeSample>| -> Result<(), SendError> {
        if pending.is_empty() {
            return Ok(());
        }
        api.post(&samples_path, &json!({ "samples": pending }))
            .map_err(SendError)?;
        requests += 1;
        pending.clear();
        Ok(())
    };
    let mut sink = |s: &GazeSample| -> Result<(), SendError> {
        pending.push(*s);
        if pending.len() >= plan.batch {
            flush(&mut pending)?;
        }
        Ok(())
    };
    replay(rec, plan.speed, &mut sink).map_err(|e| match e {
        ReplayError::InvalidSpeed(_) => CliError::Usage(e.to_string()),
        ReplayError::Rejected { source, .. } => CliError::Data(source.0),
    })?;
    flush(&mut pending).map_err(|e| CliError::Data(e.0))?;

    let snapshot = api
        .get(&format!("/sessions/{session_id}/snapshot"))
        .map_err(CliError::Data)?;
    let prompt = if plan.trigger {
        Some(
            api.post(&format!("/sessions/{session_id}/trigger"), &json!({}))
                .map_err(CliError::Data)?,
        )
    } else {
        None
    };
    let refactor = if plan.confirm {
        Some(
            api.post(&format!("/sessions/{session_id}/confirm"), &json!({}))
                .map_err(CliError::Data)?,
        )
    } else {
        None
    };
    if plan.close {
        api.post(&format!("/sessions/{session_id}/close"), &json!({}))
            .map_err(CliError::Data)?;
    }
    Ok(ReplayOutcome {
        session_id,
        journal,
        samples_sent: rec.len(),
        requests,
        snapshot,
        prompt,
        refactor,
    })
}
