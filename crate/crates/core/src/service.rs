//! HTTP API: sessions, synchronous utterance processing, snapshots and a
//! resumable NDJSON event stream.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::{Body, Bytes};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{broadcast, Mutex};
use tokio_stream::wrappers::errors::BroadcastStreamRecvError;
use tokio_stream::wrappers::BroadcastStream;

use crate::error::Error;
use crate::icn::IcnId;
use crate::ingest::{Lexicon, Utterance};
use crate::session::{open_session, EventKind, Session, SessionConfig, SessionEvent, Snapshot};

/// Per-consumer buffer of live events; a consumer further behind is cut off.
const STREAM_BUFFER: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSessionDescriptor {
    pub session_id: String,
    /// milliseconds since the Unix epoch
    pub created_at: u64,
    pub utterance_count: u64,
    pub lexicon: String,
    pub config: SessionConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub lexicon: String,
    #[serde(default)]
    pub problem_statement: String,
    /// overrides on top of the server's configuration, same sections as the config file
    #[serde(default)]
    pub config: Option<Value>,
}

/// What readers see: replaced wholesale after each write.
struct Published {
    snapshot: Arc<Snapshot>,
    events: Arc<Vec<SessionEvent>>,
    utterance_count: u64,
}

struct SessionHandle {
    writer: Mutex<Session>,
    published: RwLock<Published>,
    tx: broadcast::Sender<SessionEvent>,
    created_at: u64,
    lexicon: String,
    config: SessionConfig,
}

impl SessionHandle {
    fn published(&self) -> (Arc<Snapshot>, Arc<Vec<SessionEvent>>, u64) {
        let p = self.published.read().expect("published lock");
        (Arc::clone(&p.snapshot), Arc::clone(&p.events), p.utterance_count)
    }

    fn descriptor(&self, id: &str) -> ApiSessionDescriptor {
        ApiSessionDescriptor {
            session_id: id.to_string(),
            created_at: self.created_at,
            utterance_count: self.published().2,
            lexicon: self.lexicon.clone(),
            config: self.config.clone(),
        }
    }
}

pub struct AppState {
    lexicons: BTreeMap<String, Arc<Lexicon>>,
    config: SessionConfig,
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
    counter: AtomicU64,
}

impl AppState {
    pub fn new(lexicons: BTreeMap<String, Arc<Lexicon>>, config: SessionConfig) -> Self {
        AppState { lexicons, config, sessions: RwLock::new(HashMap::new()), counter: AtomicU64::new(0) }
    }

    fn session(&self, id: &str) -> Result<Arc<SessionHandle>, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("unknown session `{id}`")))
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Conflict(String),
    Internal(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::StaleUtterance { .. } | Error::TimeRegression { .. } => ApiError::Conflict(e.to_string()),
            Error::Config(_) | Error::UnknownFormat(_) | Error::EmptyUtterance { .. } => ApiError::BadRequest(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(json!({ "error": message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Overlay JSON overrides onto a base config, section by section.
fn merge_config(base: &SessionConfig, overrides: Option<Value>) -> Result<SessionConfig, ApiError> {
    let Some(overrides) = overrides else { return Ok(base.clone()) };
    let mut merged = serde_json::to_value(base).map_err(|e| ApiError::Internal(e.to_string()))?;
    let (Value::Object(target), Value::Object(src)) = (&mut merged, overrides) else {
        return Err(ApiError::BadRequest("config overrides must be an object".into()));
    };
    for (section, value) in src {
        match (target.get_mut(&section), value) {
            (Some(Value::Object(dst)), Value::Object(fields)) => dst.extend(fields),
            (_, _) => return Err(ApiError::BadRequest(format!("unknown config section `{section}`"))),
        }
    }
    let cfg: SessionConfig = serde_json::from_value(merged).map_err(|e| ApiError::BadRequest(format!("invalid config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<ApiSessionDescriptor>)> {
    let Json(body) = body?;
    let lexicon = app
        .lexicons
        .get(&body.lexicon)
        .cloned()
        .ok_or_else(|| ApiError::NotFound(format!("unknown lexicon `{}`", body.lexicon)))?;
    let config = merge_config(&app.config, body.config)?;
    let session = open_session(config.clone(), lexicon, &body.problem_statement)?;
    let (tx, _) = broadcast::channel(STREAM_BUFFER);
    let handle = Arc::new(SessionHandle {
        published: RwLock::new(Published {
            snapshot: Arc::new(session.snapshot()),
            events: Arc::new(session.events().to_vec()),
            utterance_count: 0,
        }),
        writer: Mutex::new(session),
        tx,
        created_at: now_ms(),
        lexicon: body.lexicon,
        config,
    });
    let id = format!("s{}", app.counter.fetch_add(1, Ordering::Relaxed) + 1);
    app.sessions.write().expect("session table lock").insert(id.clone(), Arc::clone(&handle));
    tracing::info!(session = %id, "session opened");
    Ok((StatusCode::CREATED, Json(handle.descriptor(&id))))
}

fn touched(events: &[SessionEvent]) -> (BTreeSet<IcnId>, Vec<Value>) {
    let mut icns = BTreeSet::new();
    let mut edges = Vec::new();
    for e in events {
        match e.kind {
            EventKind::IcnCreated | EventKind::IcnJoined | EventKind::ImageTagged => {
                if let Some(id) = e.payload.get("icn").and_then(Value::as_u64) {
                    icns.insert(IcnId(id as u32));
                }
            }
            EventKind::EdgeAdded => edges.extend(e.payload.get("edge").cloned()),
            _ => {}
        }
    }
    (icns, edges)
}

async fn post_utterance(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Utterance>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let handle = app.session(&id)?;
    let Json(utterance) = body?;
    let mut session = handle.writer.lock().await;
    let before = session.last_seq();
    let outcome = session.process_utterance(&utterance);
    let snapshot = Arc::new(session.snapshot());
    {
        let mut p = handle.published.write().expect("published lock");
        p.snapshot = Arc::clone(&snapshot);
        p.events = Arc::new(session.events().to_vec());
        p.utterance_count = session.utterance_count();
    }
    // rejections are logged too, so publish whatever was appended
    for e in session.events_from(before + 1) {
        // no receivers is fine
        let _ = handle.tx.send(e.clone());
    }
    drop(session);
    let batch = outcome?;

    let (icn_ids, edges) = touched(&batch.events);
    let icns: Vec<_> = icn_ids.iter().filter_map(|i| snapshot.graph.icns.get(i)).collect();
    let metrics_delta = batch
        .events
        .iter()
        .find(|e| e.kind == EventKind::MetricsUpdated)
        .and_then(|e| e.payload.get("delta").cloned());
    Ok(Json(json!({
        "utterance": batch.utterance,
        "events": batch.events,
        "metrics": snapshot.metrics,
        "metrics_delta": metrics_delta,
        "changed": { "icns": icns, "edges": edges },
    })))
}

#[derive(Debug, Deserialize)]
pub struct EventsQuery {
    #[serde(default = "one")]
    from: u64,
    /// keep the response open for live events
    #[serde(default = "yes")]
    follow: bool,
}

fn one() -> u64 {
    1
}

fn yes() -> bool {
    true
}

fn ndjson_line(v: &impl Serialize) -> Result<Bytes, std::io::Error> {
    let mut line = crate::canonical::to_string(v).map_err(std::io::Error::other)?;
    line.push('\n');
    Ok(Bytes::from(line))
}

async fn stream_events(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<EventsQuery>,
) -> ApiResult<Response> {
    if q.from == 0 {
        return Err(ApiError::BadRequest("from must be at least 1".into()));
    }
    let handle = app.session(&id)?;
    // subscribe before reading the backlog so nothing falls in between
    let rx = handle.tx.subscribe();
    let (_, log, _) = handle.published();
    let backlog: Vec<SessionEvent> = log.iter().filter(|e| e.seq >= q.from).cloned().collect();
    let next = (log.len() as u64 + 1).max(q.from);
    let head = stream::iter(backlog.into_iter().map(|e| ndjson_line(&e)));
    let body = if q.follow {
        let live = stream::unfold((BroadcastStream::new(rx), next, false), |(mut rx, mut next, done)| async move {
            if done {
                return None;
            }
            loop {
                match rx.next().await? {
                    Ok(e) if e.seq < next => continue,
                    Ok(e) => {
                        next = e.seq + 1;
                        return Some((ndjson_line(&e), (rx, next, false)));
                    }
                    // tell the consumer where to pick up, then hang up
                    Err(BroadcastStreamRecvError::Lagged(_)) => {
                        return Some((ndjson_line(&json!({ "resume_from": next })), (rx, next, true)));
                    }
                }
            }
        });
        Body::from_stream(head.chain(live))
    } else {
        Body::from_stream(head)
    };
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

#[derive(Debug, Deserialize)]
pub struct SnapshotQuery {
    #[serde(default = "json_format")]
    format: String,
}

fn json_format() -> String {
    "json".into()
}

async fn get_snapshot(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<SnapshotQuery>,
) -> ApiResult<Response> {
    let handle = app.session(&id)?;
    let (snapshot, _, _) = handle.published();
    match q.format.as_str() {
        "json" => Ok(([(header::CONTENT_TYPE, "application/json")], snapshot.to_json()).into_response()),
        "dot" => Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], snapshot.to_dot()).into_response()),
        other => Err(Error::UnknownFormat(other.to_string()).into()),
    }
}

async fn get_metrics(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let handle = app.session(&id)?;
    let (snapshot, _, _) = handle.published();
    let body = crate::canonical::to_string_pretty(&snapshot.metrics).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ApiSessionDescriptor>> {
    Ok(Json(app.session(&id)?.descriptor(&id)))
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/utterances", post(post_utterance))
        .route("/sessions/{id}/events", get(stream_events))
        .route("/sessions/{id}/snapshot", get(get_snapshot))
        .route("/sessions/{id}/metrics", get(get_metrics))
        .with_state(app)
}

/// Serve until Ctrl-C.
pub async fn serve(addr: SocketAddr, app: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
