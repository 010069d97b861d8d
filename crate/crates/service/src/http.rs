//! HTTP control endpoints and the per-session event WebSocket.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::broadcast::error::RecvError;

use gazeprompt_core::{EditorGeometry, GazeSample, InteractionMode};

use crate::actor::{ApiError, CreateSession, ErrorKind, Registry, SessionHandle};
use crate::protocol::{parse_client_frame, ClientCommand, ConnectionMessage, Phase, PROTOCOL_VERSION};

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.kind {
            ErrorKind::BadRequest => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Conflict => StatusCode::CONFLICT,
            ErrorKind::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorKind::BadGateway => StatusCode::BAD_GATEWAY,
            ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = json!({
            "protocol_version": PROTOCOL_VERSION,
            "error": {"code": self.code, "message": self.message},
        });
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<Registry>;

#[derive(Debug, Deserialize)]
struct SamplesBody {
    samples: Vec<GazeSample>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct TriggerBody {
    mode: Option<InteractionMode>,
}

pub fn router(registry: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}/samples", post(samples))
        .route("/sessions/{id}/snapshot", get(snapshot))
        .route("/sessions/{id}/trigger", post(trigger))
        .route("/sessions/{id}/confirm", post(confirm))
        .route("/sessions/{id}/geometry", post(geometry))
        .route("/sessions/{id}/close", post(close))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/events", get(events))
        .with_state(registry)
}

/// Decodes a JSON body, turning extractor rejections into protocol errors.
fn body<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return serde_json::from_str("{}")
            .map_err(|e| ApiError::new(ErrorKind::BadRequest, "malformed_body", e.to_string()));
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(ErrorKind::BadRequest, "malformed_body", e.to_string()))
}

async fn health() -> impl IntoResponse {
    Json(json!({
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "protocol_version": PROTOCOL_VERSION,
    }))
}

async fn list(State(reg): State<Shared>) -> impl IntoResponse {
    Json(json!({ "sessions": reg.session_ids() }))
}

async fn create(State(reg): State<Shared>, bytes: axum::body::Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = body(&bytes)?;
    let info = reg.create(req)?;
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

async fn samples(
    State(reg): State<Shared>,
    Path(id): Path<String>,
    bytes: axum::body::Bytes,
) -> Result<Response, ApiError> {
    let handle = reg.get(&id)?;
    let b: SamplesBody = body(&bytes)?;
    Ok(Json(handle.ingest(b.samples).await?).into_response())
}

async fn snapshot(State(reg): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(reg.get(&id)?.snapshot().await?).into_response())
}

async fn trigger(
    State(reg): State<Shared>,
    Path(id): Path<String>,
    bytes: axum::body::Bytes,
) -> Result<Response, ApiError> {
    let handle = reg.get(&id)?;
    let b: TriggerBody = body(&bytes)?;
    Ok(Json(handle.trigger(b.mode).await?).into_response())
}

async fn confirm(State(reg): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(reg.get(&id)?.confirm().await?).into_response())
}

async fn geometry(
    State(reg): State<Shared>,
    Path(id): Path<String>,
    bytes: axum::body::Bytes,
) -> Result<Response, ApiError> {
    let handle = reg.get(&id)?;
    let g: EditorGeometry = body(&bytes)?;
    Ok(Json(handle.update_geometry(g).await?).into_response())
}

async fn close(State(reg): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(reg.get(&id)?.close().await?).into_response())
}

async fn log(State(reg): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let text = reg.get(&id)?.log().await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn events(State(reg): State<Shared>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Result<Response, ApiError> {
    let handle = reg.get(&id)?;
    Ok(ws.on_upgrade(move |socket| stream_session(socket, handle)))
}

fn text<T: serde::Serialize>(value: &T) -> Message {
    Message::Text(serde_json::to_string(value).expect("messages serialize").into())
}

/// Sends the session's history, then live frames, while applying commands
/// received on the same socket. Command outcomes reach the client as frames.
async fn stream_session(socket: WebSocket, handle: SessionHandle) {
    let Ok((history, mut live)) = handle.subscribe().await else {
        return;
    };
    let (mut tx, mut rx) = socket.split();
    let (out_tx, mut out_rx) = tokio::sync::mpsc::channel::<Message>(64);

    let writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            if tx.send(msg).await.is_err() {
                break;
            }
        }
    });

    let forward_out = out_tx.clone();
    let forwarder = tokio::spawn(async move {
        let mut last_seq = None;
        for frame in &history {
            last_seq = Some(frame.seq);
            if forward_out.send(text(frame)).await.is_err() {
                return;
            }
        }
        loop {
            match live.recv().await {
                Ok(frame) => {
                    if last_seq.is_some_and(|s| frame.seq <= s) {
                        continue;
                    }
                    last_seq = Some(frame.seq);
                    let closing = frame.phase == Phase::Closed;
                    if forward_out.send(text(&frame)).await.is_err() || closing {
                        return;
                    }
                }
                Err(RecvError::Lagged(n)) => {
                    let msg = ConnectionMessage::error("lagged", format!("dropped {n} frames; reconnect to resync"));
                    let _ = forward_out.send(text(&msg)).await;
                    let _ = forward_out.send(Message::Close(None)).await;
                    return;
                }
                Err(RecvError::Closed) => return,
            }
        }
    });

    while let Some(Ok(msg)) = rx.next().await {
        let body = match msg {
            Message::Text(t) => t.to_string(),
            Message::Binary(b) => match String::from_utf8(b.to_vec()) {
                Ok(s) => s,
                Err(_) => {
                    let _ = out_tx
                        .send(text(&ConnectionMessage::error(
                            "malformed_frame",
                            "binary frame is not UTF-8",
                        )))
                        .await;
                    continue;
                }
            },
            Message::Close(_) => break,
            _ => continue,
        };
        let command = match parse_client_frame(&body) {
            Ok(c) => c,
            Err(reply) => {
                let _ = out_tx.send(text(&reply)).await;
                continue;
            }
        };
        // Errors are also published as session frames, so only snapshots
        // need a direct reply here.
        match command {
            ClientCommand::Samples { samples } => drop(handle.ingest(samples).await),
            ClientCommand::Trigger { mode } => drop(handle.trigger(mode).await),
            ClientCommand::Confirm => {
                let h = handle.clone();
                tokio::spawn(async move { drop(h.confirm().await) });
            }
            ClientCommand::Geometry { geometry } => drop(handle.update_geometry(geometry).await),
            ClientCommand::Close => drop(handle.close().await),
            ClientCommand::Snapshot => {
                if let Ok(s) = handle.snapshot().await {
                    let msg = ConnectionMessage::Snapshot {
                        protocol_version: PROTOCOL_VERSION,
                        snapshot: Box::new(s),
                    };
                    let _ = out_tx.send(text(&msg)).await;
                }
            }
        }
    }
    forwarder.abort();
    drop(out_tx);
    let _ = writer.await;
}

/// Binds `addr`; failing here (e.g. port in use) is reported before serving.
pub async fn bind(addr: &str) -> std::io::Result<TcpListener> {
    TcpListener::bind(addr).await
}

pub async fn serve(listener: TcpListener, registry: Registry) -> std::io::Result<()> {
    let local: SocketAddr = listener.local_addr()?;
    tracing::info!("listening on {local}");
    axum::serve(listener, router(Arc::new(registry))).await
}
