//! The simulation thread and the HTTP/WebSocket front.

use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::sync::{mpsc as tmpsc, watch};

use crate::protocol::{parse_request, Reply, Request, StateMsg};
use crate::session::Session;

pub const HEARTBEAT: Duration = Duration::from_secs(1);

/// A command on its way to the simulation thread with the queue its reply
/// goes back on.
pub struct Envelope {
    pub request: Request,
    pub reply: tmpsc::UnboundedSender<Reply>,
}

#[derive(Clone)]
pub struct AppState {
    pub commands: mpsc::Sender<Envelope>,
    pub states: watch::Receiver<StateMsg>,
    pub meta: Value,
}

/// Starts the simulation thread. It stops once every command sender is
/// dropped.
pub fn spawn_simulation(mut session: Session) -> (mpsc::Sender<Envelope>, watch::Receiver<StateMsg>, JoinHandle<()>) {
    let (cmd_tx, cmd_rx) = mpsc::channel::<Envelope>();
    let (state_tx, state_rx) = watch::channel(session.state(false));
    let handle = std::thread::spawn(move || {
        let mut next = Instant::now();
        let mut last_sent = Instant::now();
        loop {
            let waiting = session.paused() || session.idle();
            let deadline = if waiting { last_sent + HEARTBEAT } else { next };
            let timeout = deadline.saturating_duration_since(Instant::now());
            match cmd_rx.recv_timeout(timeout) {
                Ok(env) => {
                    let reply = session.handle(env.request);
                    let _ = env.reply.send(reply);
                    while let Ok(env) = cmd_rx.try_recv() {
                        let reply = session.handle(env.request);
                        let _ = env.reply.send(reply);
                    }
                    state_tx.send_replace(session.state(false));
                    last_sent = Instant::now();
                    if waiting {
                        next = Instant::now();
                    }
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => break,
                Err(RecvTimeoutError::Timeout) => {}
            }
            if waiting {
                state_tx.send_replace(session.state(true));
                last_sent = Instant::now();
                continue;
            }
            if session.step().is_some() {
                state_tx.send_replace(session.state(false));
                last_sent = Instant::now();
            }
            next += Duration::from_secs_f64(1.0 / session.eps());
            // Do not try to catch up after a stall.
            let now = Instant::now();
            if next + Duration::from_millis(100) < now {
                next = now;
            }
        }
    });
    (cmd_tx, state_rx, handle)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/session", get(session_meta))
        .route("/ws", get(ws_upgrade))
        .with_state(state)
}

async fn session_meta(State(app): State<AppState>) -> Json<Value> {
    let s = app.states.borrow().clone();
    let mut meta = app.meta.clone();
    meta["paused"] = json!(s.paused);
    meta["eps"] = json!(s.eps);
    meta["event"] = json!(s.event);
    meta["phase"] = json!(s.phase);
    meta["alive"] = json!(s.robots.iter().filter(|r| r.alive).count());
    Json(meta)
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(app): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, app))
}

async fn client(socket: WebSocket, app: AppState) {
    let (mut sink, mut stream) = socket.split();
    let (reply_tx, mut reply_rx) = tmpsc::unbounded_channel::<Reply>();
    let mut states = app.states.clone();
    states.mark_changed();
    loop {
        let out = tokio::select! {
            biased;
            r = reply_rx.recv() => match r {
                Some(r) => serde_json::to_string(&r),
                None => break,
            },
            incoming = stream.next() => match incoming {
                Some(Ok(Message::Text(t))) => {
                    let env = Envelope { request: parse_request(t.as_str()), reply: reply_tx.clone() };
                    if app.commands.send(env).is_err() {
                        break;
                    }
                    continue;
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => continue,
            },
            changed = states.changed() => {
                if changed.is_err() {
                    break;
                }
                let s = states.borrow_and_update().clone();
                serde_json::to_string(&s)
            }
        };
        let Ok(text) = out else { continue };
        if sink.send(Message::Text(text.into())).await.is_err() {
            break;
        }
    }
    tracing::debug!("client left");
}
