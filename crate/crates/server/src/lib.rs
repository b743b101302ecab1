//! JSON-over-HTTP session service.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/models` | model document | `{version, model_id, kind, summary}` |
//! | GET | `/models/{id}/graph` | | `{version, model_id, graph, findings}` |
//! | POST | `/sessions` | `{model_id}` | `{version, session_id, view}` |
//! | GET | `/sessions/{id}/view` | | `{version, session_id, view}` |
//! | POST | `/sessions/{id}/decisions` | `{decision, value}` | `{version, session_id, trace, view}` |
//! | POST | `/sessions/{id}/whatif` | `{decision, value}` | `{version, session_id, trace, preview}` |
//! | DELETE | `/sessions/{id}/decisions/{decision}` | | `{version, session_id, view}` |
//!
//! Errors are `{version, code, message, detail}`. Mutations of one session
//! are serialized by a per-session mutex.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State as AxumState};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use pidl::analysis::export::to_json;
use pidl::dopler::AnomalyClass;
use pidl::load::{Model, Report};
use pidl::saturation::ExploreOptions;
use pidl::session::{Choice, Session, SessionError, TraceView};

/// Version of every request and response body.
pub const API_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Config {
    /// Limit for the full analysis run when a model is uploaded.
    pub analysis_time_limit: Duration,
    pub jobs: Option<usize>,
    /// Directory for model and session snapshots.
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            analysis_time_limit: Duration::from_secs(60),
            jobs: None,
            snapshot_dir: None,
        }
    }
}

struct StoredModel {
    model: Arc<Model>,
    report: Option<Arc<Report>>,
    analysis_error: Option<String>,
}

struct StoredSession {
    model_id: String,
    session: Mutex<Session>,
}

pub struct AppState {
    config: Config,
    models: RwLock<HashMap<String, Arc<StoredModel>>>,
    sessions: RwLock<HashMap<String, Arc<StoredSession>>>,
    next_model: AtomicU64,
    next_session: AtomicU64,
}

/// An error response.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn with_detail(mut self, detail: Value) -> ApiError {
        self.detail = detail;
        self
    }

    fn not_found(what: &str, id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no {what} `{id}`"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "version": API_VERSION,
            "code": self.code,
            "message": self.message,
            "detail": self.detail,
        });
        (self.status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let message = e.to_string();
        let (status, code) = match &e {
            SessionError::UnknownDecision(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unknown_decision"),
            SessionError::InvalidValue { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_value"),
            SessionError::NotVisible(_) => (StatusCode::CONFLICT, "not_visible"),
            SessionError::AlreadyTaken(_) => (StatusCode::CONFLICT, "already_taken"),
            SessionError::NotApplicable(_) => (StatusCode::CONFLICT, "not_applicable"),
            SessionError::Blocked(_) => (StatusCode::CONFLICT, "blocked"),
            SessionError::Cycle { .. } => (StatusCode::CONFLICT, "propagation_cycle"),
            SessionError::NotInHistory(_) => (StatusCode::CONFLICT, "not_in_history"),
        };
        let detail = match &e {
            SessionError::Cycle { rule, trace } => json!({
                "rule": rule,
                "steps": trace.steps.iter().map(|s| s.rule).collect::<Vec<_>>(),
            }),
            SessionError::Blocked(status) => json!({ "status": status }),
            _ => Value::Null,
        };
        ApiError::new(status, code, message).with_detail(detail)
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSession {
    model_id: String,
}

#[derive(Serialize, Deserialize)]
struct SessionSnapshot {
    version: u32,
    session_id: String,
    model_id: String,
    choices: Vec<Choice>,
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", format!("invalid request body: {e}"))
            .with_detail(json!({ "line": e.line(), "column": e.column() }))
    })
}

fn summary(m: &StoredModel) -> Value {
    match (&m.report, &m.analysis_error) {
        (Some(r), _) => {
            let counts: serde_json::Map<String, Value> = AnomalyClass::ALL
                .iter()
                .map(|&c| (c.name().to_string(), json!(r.count(c))))
                .collect();
            json!({
                "states": r.exploration.states.len(),
                "complete": r.exploration.complete,
                "counts": counts,
            })
        }
        (None, err) => json!({ "error": err }),
    }
}

impl AppState {
    pub fn new(config: Config) -> Arc<AppState> {
        Arc::new(AppState {
            config,
            models: RwLock::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
            next_model: AtomicU64::new(1),
            next_session: AtomicU64::new(1),
        })
    }

    /// Loads the snapshots written by an earlier run, replaying each
    /// session's choices.
    pub fn restore(config: Config) -> std::io::Result<Arc<AppState>> {
        let state = AppState::new(config);
        let Some(dir) = state.config.snapshot_dir.clone() else {
            return Ok(state);
        };
        let models_dir = dir.join("models");
        std::fs::create_dir_all(&models_dir)?;
        for (id, text) in read_sorted(&models_dir)? {
            match Model::parse(&text) {
                Ok(m) => {
                    let stored = state.analyze(Arc::new(m));
                    bump(&state.next_model, &id);
                    state.models.write().unwrap().insert(id, Arc::new(stored));
                }
                Err(e) => log::warn!("skipping snapshot model {id}: {e}"),
            }
        }
        for (id, text) in read_sorted(&dir)? {
            let snap: SessionSnapshot = match serde_json::from_str(&text) {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("skipping snapshot session {id}: {e}");
                    continue;
                }
            };
            let Some(m) = state.models.read().unwrap().get(&snap.model_id).cloned() else {
                log::warn!("snapshot session {id} refers to unknown model {}", snap.model_id);
                continue;
            };
            match Session::replay(m.model.clone(), &snap.choices) {
                Ok(session) => {
                    bump(&state.next_session, &id);
                    state.sessions.write().unwrap().insert(
                        id,
                        Arc::new(StoredSession {
                            model_id: snap.model_id,
                            session: Mutex::new(session),
                        }),
                    );
                }
                Err(e) => log::warn!("snapshot session {id} does not replay: {e}"),
            }
        }
        Ok(state)
    }

    fn analyze(&self, model: Arc<Model>) -> StoredModel {
        let opts = ExploreOptions {
            jobs: self.config.jobs,
            deadline: Some(Instant::now() + self.config.analysis_time_limit),
            ..Default::default()
        };
        match model.check(&opts, pidl::analysis::DEFAULT_CYCLE_LIMIT) {
            Ok(r) => StoredModel {
                model,
                report: Some(Arc::new(r)),
                analysis_error: None,
            },
            Err(e) => StoredModel {
                model,
                report: None,
                analysis_error: Some(e.to_string()),
            },
        }
    }

    fn model(&self, id: &str) -> Result<Arc<StoredModel>, ApiError> {
        self.models.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found("model", id))
    }

    fn session(&self, id: &str) -> Result<Arc<StoredSession>, ApiError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found("session", id))
    }

    fn persist_session(&self, id: &str, model_id: &str, s: &Session) {
        let Some(dir) = &self.config.snapshot_dir else { return };
        let snap = SessionSnapshot {
            version: API_VERSION,
            session_id: id.to_string(),
            model_id: model_id.to_string(),
            choices: s.choices(),
        };
        let text = serde_json::to_string_pretty(&snap).expect("snapshots serialize");
        if let Err(e) = write_atomic(&dir.join(format!("{id}.json")), &text) {
            log::error!("cannot write snapshot for session {id}: {e}");
        }
    }
}

fn bump(counter: &AtomicU64, id: &str) {
    if let Ok(n) = id[1..].parse::<u64>() {
        counter.fetch_max(n + 1, Ordering::SeqCst);
    }
}

fn read_sorted(dir: &Path) -> std::io::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let id = path.file_stem().unwrap().to_string_lossy().into_owned();
            out.push((id, std::fs::read_to_string(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(tmp, path)
}

async fn upload_model(AxumState(app): AxumState<Arc<AppState>>, body: Bytes) -> ApiResult {
    let text = std::str::from_utf8(&body)
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "model must be UTF-8"))?
        .to_string();
    let model = Model::parse(&text).map_err(|e| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_model", e.to_string()).with_detail(match &e {
            pidl::load::ModelLoadError::Model(m) => json!({ "field": m.field() }),
            _ => Value::Null,
        })
    })?;
    let kind = match model {
        Model::Dopler { .. } => "dopler",
        Model::Spec(_) => "spec",
    };
    let worker = app.clone();
    let stored = tokio::task::spawn_blocking(move || worker.analyze(Arc::new(model)))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let id = format!("m{}", app.next_model.fetch_add(1, Ordering::SeqCst));
    if let Some(dir) = &app.config.snapshot_dir {
        if let Err(e) = write_atomic(&dir.join("models").join(format!("{id}.json")), &text) {
            log::error!("cannot write model snapshot {id}: {e}");
        }
    }
    let body = json!({
        "version": API_VERSION,
        "model_id": id,
        "kind": kind,
        "summary": summary(&stored),
    });
    app.models.write().unwrap().insert(id, Arc::new(stored));
    Ok(Json(body))
}

async fn model_graph(AxumState(app): AxumState<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let m = app.model(&id)?;
    let Some(r) = &m.report else {
        return Err(ApiError::new(StatusCode::CONFLICT, "analysis_unavailable", "the model could not be analyzed")
            .with_detail(json!({ "error": m.analysis_error })));
    };
    let graph: Value = serde_json::from_str(&to_json(&r.analysis.graph, Some(&r.analysis))).expect("graph JSON");
    Ok(Json(json!({
        "version": API_VERSION,
        "model_id": id,
        "graph": graph,
        "findings": r.findings,
    })))
}

async fn create_session(AxumState(app): AxumState<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: NewSession = parse_body(&body)?;
    let m = app.model(&req.model_id)?;
    let session = Session::new(m.model.clone());
    let view = session.view(m.report.as_deref());
    let id = format!("s{}", app.next_session.fetch_add(1, Ordering::SeqCst));
    app.persist_session(&id, &req.model_id, &session);
    app.sessions.write().unwrap().insert(
        id.clone(),
        Arc::new(StoredSession {
            model_id: req.model_id,
            session: Mutex::new(session),
        }),
    );
    Ok(Json(json!({ "version": API_VERSION, "session_id": id, "view": view })))
}

async fn get_view(AxumState(app): AxumState<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = app.session(&id)?;
    let m = app.model(&s.model_id)?;
    let session = s.session.lock().await;
    Ok(Json(json!({
        "version": API_VERSION,
        "session_id": id,
        "view": session.view(m.report.as_deref()),
    })))
}

fn trace_json(session: &Session) -> Option<TraceView> {
    session.view(None).last_trace
}

async fn take_decision(AxumState(app): AxumState<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult {
    let choice: Choice = parse_body(&body)?;
    let s = app.session(&id)?;
    let m = app.model(&s.model_id)?;
    let mut session = s.session.lock().await;
    session.take(&choice)?;
    app.persist_session(&id, &s.model_id, &session);
    Ok(Json(json!({
        "version": API_VERSION,
        "session_id": id,
        "trace": trace_json(&session),
        "view": session.view(m.report.as_deref()),
    })))
}

async fn whatif(AxumState(app): AxumState<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult {
    let choice: Choice = parse_body(&body)?;
    let s = app.session(&id)?;
    let m = app.model(&s.model_id)?;
    let session = s.session.lock().await;
    let mut preview = session.clone();
    preview.take(&choice)?;
    Ok(Json(json!({
        "version": API_VERSION,
        "session_id": id,
        "trace": trace_json(&preview),
        "preview": preview.view(m.report.as_deref()),
    })))
}

async fn retract(
    AxumState(app): AxumState<Arc<AppState>>,
    UrlPath((id, decision)): UrlPath<(String, String)>,
) -> ApiResult {
    let s = app.session(&id)?;
    let m = app.model(&s.model_id)?;
    let mut session = s.session.lock().await;
    session.retract(&decision)?;
    app.persist_session(&id, &s.model_id, &session);
    Ok(Json(json!({
        "version": API_VERSION,
        "session_id": id,
        "view": session.view(m.report.as_deref()),
    })))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

/// The API routes; with `ui`, static files from that directory are served
/// for every other path.
pub fn router(state: Arc<AppState>, ui: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/models", post(upload_model))
        .route("/models/{id}/graph", get(model_graph))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/view", get(get_view))
        .route("/sessions/{id}/decisions", post(take_decision))
        .route("/sessions/{id}/whatif", post(whatif))
        .route("/sessions/{id}/decisions/{decision}", delete(retract))
        .with_state(state);
    match ui {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

/// Serves until ctrl-c.
pub async fn serve(addr: std::net::SocketAddr, app: Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
