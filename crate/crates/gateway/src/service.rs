//! HTTP API and push stream.
//!
//! One task owns the [`Session`]; handlers talk to it over a channel and read
//! everything else from the latest published [`Snapshot`].

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use riverhelm_core::agent::{AgentError, InterpreterResponse, UIEvent};
use riverhelm_core::fleet::{FleetError, FleetInput};
use riverhelm_core::guard::{Cause, ExceptionEvent, GuardError, GuardState};
use riverhelm_core::mdl::{parse_mdl, serialize_mdl};
use riverhelm_core::sim::{FailureFlag, RobotSpec, RobotState, SimError};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::task::JoinHandle;

use crate::config::ApiConfig;
use crate::journal::Journal;
use crate::session::{Session, SessionError};

const TICK: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, Serialize)]
pub struct GuardView {
    pub state: GuardState,
    pub causes: Vec<Cause>,
    pub acknowledgeable: bool,
}

/// Last-known robot state plus its supervision status.
#[derive(Debug, Clone, Serialize)]
pub struct RobotView {
    #[serde(flatten)]
    pub state: RobotState,
    pub guard: Option<GuardView>,
}

#[derive(Debug, Default)]
pub struct Snapshot {
    pub time: f64,
    pub robots: Vec<RobotView>,
    pub map_xml: String,
    pub exceptions: BTreeMap<String, Vec<ExceptionEvent>>,
}

#[derive(Debug, Clone)]
struct Frame {
    seq: u64,
    text: Arc<str>,
}

type Reply<T> = oneshot::Sender<Result<T, SessionError>>;

enum Request {
    Ui(UIEvent, Reply<InterpreterResponse>),
    Input(FleetInput, Reply<()>),
}

#[derive(Clone)]
struct AppState {
    tx: mpsc::Sender<Request>,
    snapshot: watch::Receiver<Arc<Snapshot>>,
    frames: broadcast::Sender<Frame>,
    backlog: Arc<Mutex<Vec<Frame>>>,
    simulation_controls: bool,
    closing: watch::Receiver<bool>,
}

pub struct ServiceHandle {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    closing: watch::Sender<bool>,
    server: JoinHandle<()>,
    sim: JoinHandle<()>,
}

impl ServiceHandle {
    pub async fn stop(mut self) {
        let _ = self.closing.send(true);
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = self.server.await;
        self.sim.abort();
        let _ = self.sim.await;
    }
}

/// Builds the fleet described by `cfg` and serves it on `listener`.
pub async fn start(cfg: &ApiConfig, listener: TcpListener) -> anyhow::Result<ServiceHandle> {
    let text = std::fs::read_to_string(&cfg.map).with_context(|| format!("reading {}", cfg.map.display()))?;
    let map = Arc::new(parse_mdl(&text).map_err(|e| anyhow::anyhow!("{}: {e}", cfg.map.display()))?.map);
    let journal = Journal::create(cfg.log.as_deref()).context("opening event log")?;
    let mut session = Session::new(Arc::clone(&map), cfg.fleet.clone(), journal)?;
    for d in &cfg.robots {
        let lm = map
            .landmark(&d.landmark_id)
            .with_context(|| format!("robot {}: unknown landmark {}", d.robot_id, d.landmark_id))?;
        session.apply(FleetInput::Spawn(RobotSpec::new(d.robot_id.clone(), lm.position)))?;
    }

    let (tx, rx) = mpsc::channel(256);
    let (frames, _) = broadcast::channel(4096);
    let backlog = Arc::new(Mutex::new(Vec::new()));
    let (snap_tx, snapshot) = watch::channel(Arc::new(Snapshot::default()));
    let publisher = Publisher { frames: frames.clone(), backlog: Arc::clone(&backlog), snapshot: snap_tx };
    publisher.publish(&mut session);

    let sim = tokio::spawn(run_sim(session, rx, publisher, cfg.time_scale));
    let (closing_tx, closing) = watch::channel(false);
    let state = AppState { tx, snapshot, frames, backlog, simulation_controls: cfg.simulation_controls, closing };
    let app = router(state);
    let addr = listener.local_addr()?;
    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let server = tokio::spawn(async move {
        let res = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stop_rx.await;
            })
            .await;
        if let Err(e) = res {
            tracing::error!("server stopped: {e}");
        }
    });
    tracing::info!(%addr, "serving");
    Ok(ServiceHandle { addr, shutdown: Some(stop_tx), closing: closing_tx, server, sim })
}

/// Binds the configured address and serves until Ctrl-C.
pub async fn serve(cfg: ApiConfig) -> anyhow::Result<()> {
    let listener = TcpListener::bind(cfg.listen).await.with_context(|| format!("binding {}", cfg.listen))?;
    let handle = start(&cfg, listener).await?;
    tokio::signal::ctrl_c().await?;
    handle.stop().await;
    Ok(())
}

fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/map", get(get_map))
        .route("/api/robots", get(get_robots))
        .route("/api/robots/{id}/events", post(post_event))
        .route("/api/robots/{id}/exceptions", get(get_exceptions))
        .route("/api/robots/{id}/acknowledge", post(post_acknowledge))
        .route("/api/sim/failures/{id}", post(post_failure))
        .route("/api/stream", get(stream))
        .with_state(state)
}

struct Publisher {
    frames: broadcast::Sender<Frame>,
    backlog: Arc<Mutex<Vec<Frame>>>,
    snapshot: watch::Sender<Arc<Snapshot>>,
}

impl Publisher {
    fn publish(&self, session: &mut Session) {
        let fresh = session.take_new();
        if !fresh.is_empty() {
            let mut backlog = self.backlog.lock().expect("backlog lock");
            for r in fresh {
                let f = Frame { seq: r.seq, text: r.to_line().into() };
                backlog.push(f.clone());
                // No subscribers is fine.
                let _ = self.frames.send(f);
            }
        }
        let _ = self.snapshot.send(Arc::new(snapshot_of(session)));
    }
}

fn snapshot_of(session: &Session) -> Snapshot {
    let fleet = session.fleet();
    let robots = fleet
        .registry()
        .iter()
        .map(|e| RobotView {
            state: e.state.clone(),
            guard: fleet.guard().status(&e.state.id).map(|s| GuardView {
                state: s.state,
                causes: s.causes.iter().copied().collect(),
                acknowledgeable: fleet.guard().acknowledgeable(&e.state.id),
            }),
        })
        .collect::<Vec<_>>();
    let exceptions = robots
        .iter()
        .map(|r| (r.state.id.clone(), fleet.exceptions(&r.state.id).to_vec()))
        .collect();
    // Annotations come from the map itself, so they always resolve.
    let map_xml = serialize_mdl(fleet.map(), &fleet.annotations()).unwrap_or_default();
    Snapshot { time: fleet.time(), robots, map_xml, exceptions }
}

async fn run_sim(mut session: Session, mut rx: mpsc::Receiver<Request>, publisher: Publisher, time_scale: f64) {
    let start_wall = tokio::time::Instant::now();
    let start_sim = session.fleet().time();
    let mut ticker = tokio::time::interval(TICK);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    loop {
        tokio::select! {
            _ = ticker.tick() => {
                let target = start_sim + start_wall.elapsed().as_secs_f64() * time_scale;
                if let Err(e) = session.advance_to(target) {
                    tracing::error!("simulation stopped: {e}");
                    return;
                }
            }
            req = rx.recv() => {
                let Some(req) = req else { return };
                match req {
                    Request::Ui(ev, reply) => {
                        let out = session.apply(FleetInput::Ui(ev));
                        publisher.publish(&mut session);
                        let _ = reply.send(out.map(|r| r.expect("ui input always answers")));
                    }
                    Request::Input(input, reply) => {
                        let out = session.apply(input);
                        publisher.publish(&mut session);
                        let _ = reply.send(out.map(|_| ()));
                    }
                }
                continue;
            }
        }
        publisher.publish(&mut session);
    }
}

fn error(status: StatusCode, body: serde_json::Value) -> Response {
    (status, Json(body)).into_response()
}

fn unknown_robot(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, json!({ "error": "unknown_robot", "robot_id": id }))
}

fn session_error(e: SessionError) -> Response {
    let e = match e {
        SessionError::Fleet(e) => e,
        SessionError::Io(e) => {
            tracing::error!("event log write failed: {e}");
            return error(StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": "event log unavailable" }));
        }
    };
    match e {
        FleetError::Agent(a) => {
            let status = match a {
                AgentError::UnknownRobot { .. } => StatusCode::NOT_FOUND,
                AgentError::RobotFaulted { .. } | AgentError::InvalidEventSequence => StatusCode::CONFLICT,
                AgentError::OffMap => StatusCode::BAD_REQUEST,
            };
            error(status, serde_json::to_value(&a).unwrap_or_default())
        }
        FleetError::Guard(GuardError::UnknownRobot(id)) | FleetError::Sim(SimError::UnknownRobot(id)) => {
            unknown_robot(&id)
        }
        FleetError::Guard(GuardError::NotAcknowledgeable { state, reason }) => error(
            StatusCode::CONFLICT,
            json!({ "error": "not_acknowledgeable", "state": state, "reason": reason }),
        ),
        other => error(StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": other.to_string() })),
    }
}

fn bad_request(msg: impl std::fmt::Display) -> Response {
    error(StatusCode::BAD_REQUEST, json!({ "error": "malformed", "message": msg.to_string() }))
}

async fn call<T>(st: &AppState, make: impl FnOnce(Reply<T>) -> Request) -> Result<T, Response> {
    let (tx, rx) = oneshot::channel();
    let unavailable = || error(StatusCode::SERVICE_UNAVAILABLE, json!({ "error": "simulation stopped" }));
    st.tx.send(make(tx)).await.map_err(|_| unavailable())?;
    rx.await.map_err(|_| unavailable())?.map_err(session_error)
}

async fn get_map(State(st): State<AppState>) -> Response {
    let xml = st.snapshot.borrow().map_xml.clone();
    ([(header::CONTENT_TYPE, "application/xml")], xml).into_response()
}

async fn get_robots(State(st): State<AppState>) -> Response {
    let snap = Arc::clone(&st.snapshot.borrow());
    Json(&snap.robots).into_response()
}

async fn post_event(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let ev: UIEvent = match serde_json::from_slice(&body) {
        Ok(ev) => ev,
        Err(e) => return bad_request(e),
    };
    if ev.robot_id() != id {
        return bad_request(format!("event names robot {} but the path names {id}", ev.robot_id()));
    }
    match call(&st, |tx| Request::Ui(ev, tx)).await {
        Ok(resp) => Json(resp).into_response(),
        Err(r) => r,
    }
}

async fn get_exceptions(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    let snap = Arc::clone(&st.snapshot.borrow());
    match snap.exceptions.get(&id) {
        Some(h) => Json(h).into_response(),
        None => unknown_robot(&id),
    }
}

#[derive(Deserialize)]
struct AckBody {
    operator_id: String,
}

async fn post_acknowledge(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let b: AckBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return bad_request(e),
    };
    let input = FleetInput::Acknowledge { robot_id: id.clone(), operator_id: b.operator_id };
    match call(&st, |tx| Request::Input(input, tx)).await {
        Ok(()) => {
            let snap = Arc::clone(&st.snapshot.borrow());
            Json(snap.exceptions.get(&id).and_then(|h| h.last()).cloned()).into_response()
        }
        Err(r) => r,
    }
}

#[derive(Deserialize)]
struct FailureBody {
    flag: FailureFlag,
    #[serde(default = "yes")]
    value: bool,
}

fn yes() -> bool {
    true
}

async fn post_failure(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    if !st.simulation_controls {
        return error(StatusCode::FORBIDDEN, json!({ "error": "simulation_controls disabled" }));
    }
    let b: FailureBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return bad_request(e),
    };
    let input = FleetInput::InjectFailure { robot_id: id, flag: b.flag, value: b.value };
    match call(&st, |tx| Request::Input(input, tx)).await {
        Ok(()) => StatusCode::NO_CONTENT.into_response(),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
struct StreamQuery {
    /// Replay persisted frames from this seq before going live.
    since: Option<u64>,
}

async fn stream(State(st): State<AppState>, Query(q): Query<StreamQuery>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| push_frames(socket, st, q.since))
}

async fn push_frames(mut socket: WebSocket, mut st: AppState, since: Option<u64>) {
    let mut rx = st.frames.subscribe();
    let mut last: Option<u64> = None;
    if let Some(from) = since {
        let old: Vec<Frame> = st.backlog.lock().expect("backlog lock").iter().filter(|f| f.seq >= from).cloned().collect();
        for f in old {
            last = Some(f.seq);
            if socket.send(Message::Text(f.text.as_ref().into())).await.is_err() {
                return;
            }
        }
    }
    loop {
        tokio::select! {
            frame = rx.recv() => match frame {
                Ok(f) => {
                    if last.is_some_and(|l| f.seq <= l) {
                        continue;
                    }
                    last = Some(f.seq);
                    if socket.send(Message::Text(f.text.as_ref().into())).await.is_err() {
                        return;
                    }
                }
                // A lagging client is dropped; it can resume with `since`.
                Err(_) => return,
            },
            _ = st.closing.changed() => {
                let _ = socket.send(Message::Close(None)).await;
                return;
            }
            msg = socket.recv() => match msg {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
