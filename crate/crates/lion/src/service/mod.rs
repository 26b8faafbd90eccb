//! HTTP and WebSocket host for deployment sessions.
//!
//! All payloads are JSON. Each session runs as one task that owns its
//! [`Session`] and processes commands in arrival order; reads are served from a
//! snapshot the task refreshes after every step, so they never wait on stepping.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | `POST` | `/sessions` | [`CreateSession`] | `201` [`SessionStatus`] |
//! | `GET` | `/sessions` | | `[SessionStatus]` |
//! | `GET` | `/sessions/{id}` | | [`SessionStatus`] |
//! | `DELETE` | `/sessions/{id}` | | `204` |
//! | `POST` | `/sessions/{id}/lambda` | `{"lambda": f64}` | [`LambdaAck`] |
//! | `POST` | `/sessions/{id}/step` | `{"n": usize}` | `{"events": [StreamEvent]}` |
//! | `POST` | `/sessions/{id}/mode` | [`Mode`] | [`SessionStatus`] |
//! | `GET` | `/sessions/{id}/report` | | [`SessionReport`] |
//! | `GET` | `/sessions/{id}/events?since=step` | | `{"events": [StreamEvent]}` (retained backlog) |
//! | `GET` | `/sessions/{id}/log` | | `{"spec": SessionSpec, "changes": [LambdaChange]}` |
//! | `GET` | `/sessions/{id}/quiver?lambda=&n=` | | `{"lambda", "n", "points": [QuiverPoint]}` |
//! | `GET` | `/sessions/{id}/stream` | WebSocket | [`StreamMessage`] frames |
//! | `GET` | `/artifacts` | | [`ArtifactListing`] |
//!
//! Errors are `{"error": message}` with a 4xx status. Unknown environments add
//! `"available": [name]`.

mod session;

use std::collections::{HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use lion_core::lion::LionPolicy;
use lion_core::models::BehaviorNet;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{broadcast, mpsc, oneshot};

pub use session::{
    quiver, LambdaAck, LambdaChange, LambdaRow, Mode, QuiverPoint, Session, SessionReport, SessionSpec, StreamEvent,
};

use crate::checkpoint::{read_header, Artifact, Header};
use crate::envs::{EnvConfig, ENV_NAMES};
use crate::error::Error;

pub const DEFAULT_RATE_CAP: f64 = 20.0;
const BACKLOG: usize = 10_000;
const MAX_STEP_REQUEST: usize = 100_000;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub artifact_dir: PathBuf,
    /// Served at `/` when set (the dashboard bundle).
    pub static_dir: Option<PathBuf>,
    /// Upper bound on auto-run speed in steps per second.
    pub rate_cap: f64,
}

impl ServiceConfig {
    pub fn new(artifact_dir: impl Into<PathBuf>) -> Self {
        Self {
            artifact_dir: artifact_dir.into(),
            static_dir: None,
            rate_cap: DEFAULT_RATE_CAP,
        }
    }
}

/// `POST /sessions` body. Checkpoint paths are relative to the artifact directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CreateSession {
    pub env: String,
    /// Overrides the registered defaults; its kind must match `env`.
    #[serde(default)]
    pub env_config: Option<EnvConfig>,
    pub policy: String,
    pub behavior: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionStatus {
    pub id: String,
    pub env: String,
    pub policy: String,
    pub behavior: String,
    pub seed: u64,
    pub lambda: f64,
    pub mode: Mode,
    pub steps: u64,
    pub episode: u64,
    pub observation: Vec<f64>,
}

/// Frames sent on `/sessions/{id}/stream`. Clients may send
/// `{"type":"set_lambda","lambda":x}`, `{"type":"step","n":k}` or
/// `{"type":"mode", ...Mode}`; each is answered with `ack` or `error`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StreamMessage {
    Status(SessionStatus),
    Event(StreamEvent),
    Ack { command: String, body: Value },
    Error { error: String },
    /// Events were dropped for this subscriber; fetch `/events?since=` to fill the gap.
    Lagged { skipped: u64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ClientMessage {
    SetLambda { lambda: f64 },
    Step { n: usize },
    Mode(Mode),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointInfo {
    pub file: String,
    pub header: Header,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportInfo {
    pub file: String,
    pub report: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactListing {
    pub envs: Vec<(String, EnvConfig)>,
    pub checkpoints: Vec<CheckpointInfo>,
    pub reports: Vec<ReportInfo>,
}

/// Scans `dir` (non-recursively) for checkpoints and report files.
pub fn list_artifacts(dir: &Path) -> crate::Result<ArtifactListing> {
    let envs = ENV_NAMES.iter().map(|n| (n.to_string(), EnvConfig::by_name(n).expect("registered"))).collect();
    let mut checkpoints = Vec::new();
    let mut reports = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    for path in entries {
        let file = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        if let Ok(header) = read_header(&path) {
            checkpoints.push(CheckpointInfo { file, header });
        } else if file.ends_with(".jsonl") {
            let first = std::fs::read_to_string(&path)
                .ok()
                .and_then(|t| t.lines().next().and_then(|l| serde_json::from_str::<Value>(l).ok()));
            if let Some(v) = first.filter(|v| v["record"] == "meta") {
                reports.push(ReportInfo {
                    file,
                    report: v["report"].as_str().unwrap_or_default().into(),
                });
            }
        }
    }
    Ok(ArtifactListing {
        envs,
        checkpoints,
        reports,
    })
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session '{id}'"))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownEnv { .. } | Error::Io { .. } => StatusCode::NOT_FOUND,
            Error::Core(_) | Error::Config(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut err = ApiError::new(status, e.to_string());
        if let Error::UnknownEnv { available, .. } = &e {
            err.body["available"] = json!(available);
        }
        err
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

enum Command {
    SetLambda(f64, oneshot::Sender<Result<LambdaAck, String>>),
    Step(usize, oneshot::Sender<Result<Vec<StreamEvent>, String>>),
    SetMode(Mode, oneshot::Sender<Result<SessionStatus, String>>),
    Stop,
}

struct Snapshot {
    status: SessionStatus,
    report: SessionReport,
    backlog: VecDeque<StreamEvent>,
    log: Vec<LambdaChange>,
}

struct Handle {
    commands: mpsc::UnboundedSender<Command>,
    events: broadcast::Sender<StreamEvent>,
    snapshot: Arc<RwLock<Snapshot>>,
    spec: SessionSpec,
    policy: LionPolicy,
}

struct Inner {
    cfg: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Handle>>>,
    next_id: AtomicU64,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(cfg: ServiceConfig) -> Self {
        Self(Arc::new(Inner {
            cfg,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }))
    }

    fn handle(&self, id: &str) -> ApiResult<Arc<Handle>> {
        self.0.sessions.read().get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }

    fn resolve(&self, rel: &str) -> ApiResult<PathBuf> {
        let p = Path::new(rel);
        if p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("checkpoint path '{rel}' must stay inside the artifact directory")));
        }
        Ok(self.0.cfg.artifact_dir.join(p))
    }
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.0.cfg.static_dir.clone();
    let api = Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/lambda", post(set_lambda))
        .route("/sessions/{id}/step", post(step_session))
        .route("/sessions/{id}/mode", post(set_mode))
        .route("/sessions/{id}/report", get(get_report))
        .route("/sessions/{id}/events", get(get_events))
        .route("/sessions/{id}/log", get(get_log))
        .route("/sessions/{id}/quiver", get(get_quiver))
        .route("/sessions/{id}/stream", get(stream))
        .route("/artifacts", get(artifacts))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(cfg: ServiceConfig, addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(cfg))).await?;
    Ok(())
}

fn status_of(id: &str, req: &CreateSession, s: &Session, mode: Mode) -> SessionStatus {
    SessionStatus {
        id: id.into(),
        env: s.env().name().into(),
        policy: req.policy.clone(),
        behavior: req.behavior.clone(),
        seed: s.spec().seed,
        lambda: s.lambda(),
        mode,
        steps: s.steps(),
        episode: s.episode(),
        observation: s.observation(),
    }
}

async fn create_session(State(state): State<AppState>, Json(req): Json<CreateSession>) -> ApiResult<(StatusCode, Json<SessionStatus>)> {
    let mut env = EnvConfig::by_name(&req.env)?;
    if let Some(cfg) = &req.env_config {
        if cfg.name() != env.name() {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("env_config is a {} config, env is {}", cfg.name(), req.env)));
        }
        env = cfg.clone();
    }
    let policy = LionPolicy::load(&state.resolve(&req.policy)?)?;
    let behavior = BehaviorNet::load(&state.resolve(&req.behavior)?)?;
    let spec = SessionSpec {
        env,
        seed: req.seed,
        window: req.window,
    };
    let session = Session::new(spec.clone(), policy.clone(), behavior)?;
    let id = format!("s{}", state.0.next_id.fetch_add(1, Ordering::Relaxed));
    let status = status_of(&id, &req, &session, Mode::Paused);
    let snapshot = Arc::new(RwLock::new(Snapshot {
        status: status.clone(),
        report: session.report(),
        backlog: VecDeque::new(),
        log: Vec::new(),
    }));
    let (tx, rx) = mpsc::unbounded_channel();
    let (events, _) = broadcast::channel(1024);
    tokio::spawn(run_session(session, rx, events.clone(), snapshot.clone(), state.0.cfg.rate_cap));
    let handle = Arc::new(Handle {
        commands: tx,
        events,
        snapshot,
        spec,
        policy,
    });
    state.0.sessions.write().insert(id, handle);
    Ok((StatusCode::CREATED, Json(status)))
}

struct Actor {
    session: Session,
    events: broadcast::Sender<StreamEvent>,
    snapshot: Arc<RwLock<Snapshot>>,
    mode: Mode,
    rate_cap: f64,
}

impl Actor {
    fn advance(&mut self, n: usize) -> Result<Vec<StreamEvent>, String> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let e = self.session.step().map_err(|e| e.to_string())?;
            let _ = self.events.send(e.clone());
            out.push(e);
        }
        self.publish(&out);
        Ok(out)
    }

    fn publish(&self, new: &[StreamEvent]) {
        let mut snap = self.snapshot.write();
        for e in new {
            if snap.backlog.len() == BACKLOG {
                snap.backlog.pop_front();
            }
            snap.backlog.push_back(e.clone());
        }
        snap.status.lambda = self.session.lambda();
        snap.status.mode = self.mode;
        snap.status.steps = self.session.steps();
        snap.status.episode = self.session.episode();
        snap.status.observation = self.session.observation();
        snap.report = self.session.report();
        snap.log = self.session.lambda_log().to_vec();
    }

    fn set_mode(&mut self, mode: Mode) -> Result<SessionStatus, String> {
        let capped = |r: f64| {
            if r.is_finite() && r > 0.0 {
                Ok(r.min(self.rate_cap))
            } else {
                Err(format!("steps_per_sec must be positive, got {r}"))
            }
        };
        self.mode = match mode {
            Mode::Paused => Mode::Paused,
            Mode::Stepping { remaining: 0, .. } => Mode::Paused,
            Mode::Stepping { remaining, steps_per_sec } => Mode::Stepping {
                remaining,
                steps_per_sec: capped(steps_per_sec)?,
            },
            Mode::AutoRun { steps_per_sec } => Mode::AutoRun {
                steps_per_sec: capped(steps_per_sec)?,
            },
        };
        self.publish(&[]);
        Ok(self.snapshot.read().status.clone())
    }

    fn tick(&mut self) {
        if let Err(e) = self.advance(1) {
            tracing::warn!("auto-run stopped: {e}");
            self.mode = Mode::Paused;
        }
        if let Mode::Stepping { remaining, steps_per_sec } = self.mode {
            self.mode = if remaining <= 1 {
                Mode::Paused
            } else {
                Mode::Stepping {
                    remaining: remaining - 1,
                    steps_per_sec,
                }
            };
        }
        self.publish(&[]);
    }
}

async fn run_session(
    session: Session,
    mut commands: mpsc::UnboundedReceiver<Command>,
    events: broadcast::Sender<StreamEvent>,
    snapshot: Arc<RwLock<Snapshot>>,
    rate_cap: f64,
) {
    let mut actor = Actor {
        session,
        events,
        snapshot,
        mode: Mode::Paused,
        rate_cap,
    };
    let mut ticker: Option<(f64, tokio::time::Interval)> = None;
    loop {
        let rate = actor.mode.rate();
        if ticker.as_ref().map(|(r, _)| Some(*r)) != Some(rate) {
            ticker = rate.map(|r| {
                let mut iv = tokio::time::interval(Duration::from_secs_f64(1.0 / r));
                iv.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
                (r, iv)
            });
        }
        let tick = async {
            match ticker.as_mut() {
                Some((_, iv)) => {
                    iv.tick().await;
                }
                None => futures::future::pending::<()>().await,
            }
        };
        tokio::select! {
            biased;
            cmd = commands.recv() => match cmd {
                Some(Command::SetLambda(l, reply)) => {
                    let ack = actor.session.set_lambda(l).map_err(|e| e.to_string());
                    actor.publish(&[]);
                    let _ = reply.send(ack);
                }
                Some(Command::Step(n, reply)) => {
                    let _ = reply.send(actor.advance(n));
                }
                Some(Command::SetMode(m, reply)) => {
                    let _ = reply.send(actor.set_mode(m));
                }
                Some(Command::Stop) | None => break,
            },
            _ = tick => actor.tick(),
        }
    }
}

async fn ask<T>(handle: &Handle, make: impl FnOnce(oneshot::Sender<Result<T, String>>) -> Command) -> ApiResult<T> {
    let (tx, rx) = oneshot::channel();
    handle
        .commands
        .send(make(tx))
        .map_err(|_| ApiError::new(StatusCode::GONE, "session has stopped"))?;
    rx.await
        .map_err(|_| ApiError::new(StatusCode::GONE, "session has stopped"))?
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e))
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<SessionStatus>> {
    let mut out: Vec<SessionStatus> = state.0.sessions.read().values().map(|h| h.snapshot.read().status.clone()).collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Json(out)
}

async fn get_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<SessionStatus>> {
    Ok(Json(state.handle(&id)?.snapshot.read().status.clone()))
}

async fn delete_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<StatusCode> {
    let handle = state.0.sessions.write().remove(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let _ = handle.commands.send(Command::Stop);
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
struct LambdaBody {
    lambda: f64,
}

async fn set_lambda(State(state): State<AppState>, UrlPath(id): UrlPath<String>, Json(body): Json<LambdaBody>) -> ApiResult<Json<LambdaAck>> {
    let h = state.handle(&id)?;
    Ok(Json(ask(&h, |tx| Command::SetLambda(body.lambda, tx)).await?))
}

#[derive(Deserialize)]
struct StepBody {
    #[serde(default = "one")]
    n: usize,
}

fn one() -> usize {
    1
}

#[derive(Serialize, Deserialize)]
pub struct Events {
    pub events: Vec<StreamEvent>,
}

async fn step_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>, Json(body): Json<StepBody>) -> ApiResult<Json<Events>> {
    if body.n > MAX_STEP_REQUEST {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("n must be at most {MAX_STEP_REQUEST}")));
    }
    let h = state.handle(&id)?;
    Ok(Json(Events {
        events: ask(&h, |tx| Command::Step(body.n, tx)).await?,
    }))
}

async fn set_mode(State(state): State<AppState>, UrlPath(id): UrlPath<String>, Json(mode): Json<Mode>) -> ApiResult<Json<SessionStatus>> {
    let h = state.handle(&id)?;
    Ok(Json(ask(&h, |tx| Command::SetMode(mode, tx)).await?))
}

async fn get_report(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<SessionReport>> {
    Ok(Json(state.handle(&id)?.snapshot.read().report.clone()))
}

#[derive(Deserialize)]
struct Since {
    #[serde(default)]
    since: u64,
}

async fn get_events(State(state): State<AppState>, UrlPath(id): UrlPath<String>, Query(q): Query<Since>) -> ApiResult<Json<Events>> {
    let h = state.handle(&id)?;
    let snap = h.snapshot.read();
    Ok(Json(Events {
        events: snap.backlog.iter().filter(|e| e.step >= q.since).cloned().collect(),
    }))
}

async fn get_log(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let h = state.handle(&id)?;
    let changes = h.snapshot.read().log.clone();
    Ok(Json(json!({ "spec": h.spec, "changes": changes })))
}

#[derive(Deserialize)]
struct QuiverQuery {
    lambda: Option<f64>,
    #[serde(default = "default_grid")]
    n: usize,
}

fn default_grid() -> usize {
    11
}

async fn get_quiver(State(state): State<AppState>, UrlPath(id): UrlPath<String>, Query(q): Query<QuiverQuery>) -> ApiResult<Json<Value>> {
    let h = state.handle(&id)?;
    if q.n == 0 || q.n > 101 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "n must be in 1..=101"));
    }
    let lambda = q.lambda.unwrap_or_else(|| h.snapshot.read().status.lambda);
    if !(0.0..=1.0).contains(&lambda) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("lambda {lambda} outside [0, 1]")));
    }
    let env = h.spec.env.build()?;
    let points = quiver(&env, &h.policy, lambda, q.n)?;
    Ok(Json(json!({ "lambda": lambda, "n": q.n, "points": points })))
}

async fn artifacts(State(state): State<AppState>) -> ApiResult<Json<ArtifactListing>> {
    Ok(Json(list_artifacts(&state.0.cfg.artifact_dir)?))
}

async fn stream(State(state): State<AppState>, UrlPath(id): UrlPath<String>, ws: WebSocketUpgrade) -> ApiResult<Response> {
    let h = state.handle(&id)?;
    Ok(ws.on_upgrade(move |socket| stream_session(socket, h)))
}

fn frame(m: &StreamMessage) -> Message {
    Message::Text(serde_json::to_string(m).expect("message serializes").into())
}

async fn stream_session(socket: WebSocket, h: Arc<Handle>) {
    let (mut sink, mut incoming) = socket.split();
    let mut events = h.events.subscribe();
    let status = h.snapshot.read().status.clone();
    if sink.send(frame(&StreamMessage::Status(status))).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            e = events.recv() => {
                let msg = match e {
                    Ok(e) => StreamMessage::Event(e),
                    Err(broadcast::error::RecvError::Lagged(skipped)) => StreamMessage::Lagged { skipped },
                    Err(broadcast::error::RecvError::Closed) => break,
                };
                if sink.send(frame(&msg)).await.is_err() {
                    break;
                }
            }
            m = incoming.next() => {
                let text = match m {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let reply = handle_client(&h, &text).await;
                if sink.send(frame(&reply)).await.is_err() {
                    break;
                }
            }
        }
    }
}

async fn handle_client(h: &Handle, text: &str) -> StreamMessage {
    let msg: ClientMessage = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => return StreamMessage::Error { error: e.to_string() },
    };
    let result = match msg {
        ClientMessage::SetLambda { lambda } => ask(h, |tx| Command::SetLambda(lambda, tx)).await.map(|a| ("set_lambda", json!(a))),
        ClientMessage::Step { n } if n > MAX_STEP_REQUEST => Err(ApiError::new(StatusCode::BAD_REQUEST, "too many steps")),
        ClientMessage::Step { n } => ask(h, |tx| Command::Step(n, tx)).await.map(|e| ("step", json!({ "count": e.len() }))),
        ClientMessage::Mode(m) => ask(h, |tx| Command::SetMode(m, tx)).await.map(|s| ("mode", json!(s))),
    };
    match result {
        Ok((command, body)) => StreamMessage::Ack {
            command: command.into(),
            body,
        },
        Err(e) => StreamMessage::Error {
            error: e.body["error"].as_str().unwrap_or("error").into(),
        },
    }
}
