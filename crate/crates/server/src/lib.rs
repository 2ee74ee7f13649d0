//! Live stream endpoint for a running simulation.
//!
//! A WebSocket at `/stream` carries the line grammar from
//! [`vdrive_core::telemetry::wire`]: the server pushes `FRAME` lines, clients
//! send `CMD` lines and get `ACK`/`ERR` back. A client that falls behind loses
//! frames and is told how many through `STATS dropped=N`.
//!
//! Bandwidth is deliberately bounded. Only every `decimation`-th frame is
//! broadcast (10 by default, about 100 Hz with the default 1 kHz speed loop),
//! and each client has a fixed-size backlog.

use std::future::{Future, IntoFuture};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::Sender;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::net::{TcpListener, ToSocketAddrs};
use tokio::sync::{broadcast, oneshot, watch};
use vdrive_core::telemetry::StreamMessage;
use vdrive_core::{Command, Engine, EngineError, RunReport, Scenario};

pub const STREAM_PATH: &str = "/stream";

#[derive(Clone, Debug)]
pub struct StreamConfig {
    /// Broadcast every n-th frame.
    pub decimation: u32,
    /// Simulated seconds per wall-clock second; 0 runs unpaced.
    pub realtime: f64,
    /// Per-client backlog in frames before drops start.
    pub backlog: usize,
    /// Stop serving once the scenario has run to its end.
    pub exit_on_finish: bool,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            decimation: 10,
            realtime: 1.0,
            backlog: 256,
            exit_on_finish: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen: {0}")]
    Bind(#[source] std::io::Error),
    #[error("invalid stream config: {0}")]
    Config(&'static str),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("engine thread panicked")]
    EnginePanic,
}

#[derive(Clone)]
struct AppState {
    frames: broadcast::Sender<Utf8Bytes>,
    commands: Sender<Command>,
    closing: watch::Receiver<bool>,
}

/// A bound but not yet running session.
pub struct Server {
    listener: TcpListener,
    engine: Engine,
    config: StreamConfig,
}

impl Server {
    pub async fn bind(addr: impl ToSocketAddrs, scenario: &Scenario, config: StreamConfig) -> Result<Self, ServeError> {
        if config.decimation == 0 {
            return Err(ServeError::Config("decimation must be at least 1"));
        }
        if !(config.realtime >= 0.0 && config.realtime.is_finite()) {
            return Err(ServeError::Config("realtime factor must be finite and >= 0"));
        }
        if config.backlog == 0 {
            return Err(ServeError::Config("backlog must be at least 1"));
        }
        let listener = TcpListener::bind(addr).await.map_err(ServeError::Bind)?;
        Ok(Self {
            listener,
            engine: Engine::new(scenario),
            config,
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Runs the simulation and the endpoint until `shutdown` resolves (or the
    /// scenario ends, with `exit_on_finish`). Returns the report at the point
    /// the engine stopped.
    pub async fn run(mut self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<RunReport, ServeError> {
        let commands = self.engine.command_sender();
        let (frames, _) = broadcast::channel(self.config.backlog);
        let (close_tx, closing) = watch::channel(false);
        let stop = Arc::new(AtomicBool::new(false));
        let (done_tx, done_rx) = oneshot::channel::<()>();

        let engine_task = {
            let frames = frames.clone();
            let stop = stop.clone();
            let config = self.config.clone();
            let engine = self.engine;
            tokio::task::spawn_blocking(move || {
                let r = drive(engine, &frames, &config, &stop);
                drop(done_tx);
                r
            })
        };

        let app = Router::new().route(STREAM_PATH, get(upgrade)).with_state(AppState {
            frames,
            commands,
            closing: closing.clone(),
        });
        let mut server_closing = closing;
        let server = tokio::spawn(
            axum::serve(self.listener, app)
                .with_graceful_shutdown(async move {
                    let _ = server_closing.wait_for(|c| *c).await;
                })
                .into_future(),
        );

        let exit_on_finish = self.config.exit_on_finish;
        tokio::select! {
            _ = shutdown => {}
            _ = done_rx, if exit_on_finish => {}
        }
        stop.store(true, Ordering::Relaxed);
        let _ = close_tx.send(true);
        server.await.map_err(|_| ServeError::EnginePanic)??;
        let report = engine_task.await.map_err(|_| ServeError::EnginePanic)??;
        Ok(report)
    }
}

/// Engine loop: advances in slices of ten control periods, broadcasting the
/// decimated frames and sleeping to hold the realtime factor.
fn drive(
    mut engine: Engine,
    frames: &broadcast::Sender<Utf8Bytes>,
    config: &StreamConfig,
    stop: &AtomicBool,
) -> Result<RunReport, EngineError> {
    let slice = 10 * engine.scenario().sim.period_ticks();
    let start = Instant::now();
    let mut n: u64 = 0;
    while !engine.is_finished() && !stop.load(Ordering::Relaxed) {
        engine.run_until(engine.now() + slice)?;
        for f in engine.drain_frames() {
            if n.is_multiple_of(config.decimation as u64) {
                // no subscribers is fine
                let _ = frames.send(StreamMessage::Frame(f).encode().into());
            }
            n += 1;
        }
        if config.realtime > 0.0 {
            let due = start + Duration::from_secs_f64(engine.time() / config.realtime);
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
    }
    Ok(engine.report())
}

/// Reply to one client line. Only `CMD` is accepted from clients.
pub fn handle_line(line: &str, commands: &Sender<Command>) -> StreamMessage {
    match StreamMessage::decode(line) {
        Ok(StreamMessage::Command { id, command }) => match commands.send(command) {
            Ok(()) => StreamMessage::Ack { id },
            Err(_) => StreamMessage::Error {
                id: Some(id),
                text: "simulation ended".into(),
            },
        },
        Ok(_) => StreamMessage::Error {
            id: None,
            text: "parse".into(),
        },
        Err(e) => e.reply(),
    }
}

/// Next line owed to a client: a frame, or a `STATS` line right after the
/// client fell behind. `None` once the frame source is gone.
async fn next_line(rx: &mut broadcast::Receiver<Utf8Bytes>, dropped: &mut u64) -> Option<Utf8Bytes> {
    match rx.recv().await {
        Ok(line) => Some(line),
        Err(broadcast::error::RecvError::Lagged(k)) => {
            *dropped += k;
            Some(StreamMessage::Stats { dropped: *dropped }.encode().into())
        }
        Err(broadcast::error::RecvError::Closed) => None,
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, state))
}

async fn client(socket: WebSocket, state: AppState) {
    let mut rx = state.frames.subscribe();
    let mut closing = state.closing;
    let (mut out, mut incoming) = socket.split();
    let mut dropped = 0u64;
    loop {
        let reply: Vec<StreamMessage> = tokio::select! {
            line = next_line(&mut rx, &mut dropped) => match line {
                Some(line) => {
                    if out.send(Message::Text(line)).await.is_err() {
                        break;
                    }
                    continue;
                }
                None => break,
            },
            m = incoming.next() => match m {
                Some(Ok(Message::Text(t))) => t
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| handle_line(l, &state.commands))
                    .collect(),
                Some(Ok(Message::Binary(_))) => vec![StreamMessage::Error { id: None, text: "parse".into() }],
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => continue,
            },
            _ = async { closing.wait_for(|c| *c).await.map(|_| ()) } => {
                let _ = out.send(Message::Close(None)).await;
                break;
            }
        };
        for m in reply {
            if out.send(Message::Text(m.encode().into())).await.is_err() {
                return;
            }
        }
    }
}
