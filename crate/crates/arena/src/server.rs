use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use pursuit_core::scenario::{to_toml, Scenario};
use tokio::net::TcpListener;
use tokio::time::{interval, timeout, MissedTickBehavior};

use crate::protocol::ServerMessage;
use crate::session::{Pacing, Session};

#[derive(Clone, Debug)]
pub struct ArenaConfig {
    pub scenario: Scenario,
    pub pacing: Pacing,
    /// A client that cannot take a frame within this long is dropped, so a
    /// slow reader never stalls the tick loop.
    pub send_timeout: Duration,
    /// Where finished games are saved as replayable scenarios
    /// (`session-<id>-<game>.toml`, scripted evader).
    pub log_dir: Option<PathBuf>,
}

impl ArenaConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            pacing: Pacing::default(),
            send_timeout: Duration::from_millis(500),
            log_dir: None,
        }
    }
}

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

/// Router with the `/arena` websocket endpoint; each connection gets its own
/// session.
pub fn router(cfg: ArenaConfig) -> Router {
    Router::new()
        .route("/arena", get(upgrade))
        .with_state(Arc::new(cfg))
}

pub async fn serve(listener: TcpListener, cfg: ArenaConfig) -> std::io::Result<()> {
    axum::serve(listener, router(cfg)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(cfg): State<Arc<ArenaConfig>>) -> Response {
    ws.on_upgrade(move |socket| play(socket, cfg))
}

async fn play(socket: WebSocket, cfg: Arc<ArenaConfig>) {
    let id = NEXT_SESSION.fetch_add(1, Ordering::Relaxed);
    let (mut tx, mut rx) = socket.split();
    let mut session = match Session::new(cfg.scenario.clone(), cfg.pacing) {
        Ok(s) => s,
        Err(e) => {
            let msg = ServerMessage::Error {
                msg: format!("cannot start session: {e}"),
            };
            let _ = timeout(cfg.send_timeout, tx.send(Message::Text(msg.to_json().into()))).await;
            return;
        }
    };
    tracing::info!(session = id, "connected");

    let mut ticker = interval(Duration::from_secs_f64(1.0 / cfg.pacing.broadcast_hz));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
    let mut pending = Some(session.frame());
    let mut games = 0usize;
    loop {
        persist(&cfg, id, &mut session, &mut games);
        if let Some(frame) = pending.take() {
            let sent = timeout(cfg.send_timeout, tx.send(Message::Text(frame.to_json().into()))).await;
            if !matches!(sent, Ok(Ok(()))) {
                tracing::warn!(session = id, "client too slow or gone, dropping");
                break;
            }
        }
        pending = tokio::select! {
            _ = ticker.tick() => session.tick(),
            msg = rx.next() => match msg {
                Some(Ok(Message::Text(text))) => session.handle_text(text.as_str()),
                Some(Ok(Message::Binary(_))) => Some(ServerMessage::Error {
                    msg: "expected a text frame".into(),
                }),
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => None,
            },
        };
    }
    session.archive_current();
    persist(&cfg, id, &mut session, &mut games);
    tracing::info!(session = id, status = ?session.status(), "disconnected");
}

fn persist(cfg: &ArenaConfig, id: u64, session: &mut Session, games: &mut usize) {
    let replays = session.drain_archive();
    let Some(dir) = &cfg.log_dir else { return };
    for sc in replays {
        *games += 1;
        let path = dir.join(format!("session-{id}-{games}.toml"));
        match std::fs::write(&path, to_toml(&sc)) {
            Ok(()) => tracing::info!(session = id, path = %path.display(), "control log saved"),
            Err(e) => tracing::warn!(session = id, path = %path.display(), "control log not saved: {e}"),
        }
    }
}
