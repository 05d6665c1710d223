use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use pursuit_arena::protocol::{ServerMessage, StateFrame, Status};
use pursuit_arena::{ArenaConfig, Pacing};
use pursuit_core::scenario::parse_scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokio::net::TcpListener;
use tokio_tungstenite::tungstenite::Message;

async fn spawn_arena(file: &str) -> String {
    spawn_arena_logging(file, None).await
}

async fn spawn_arena_logging(file: &str, log_dir: Option<std::path::PathBuf>) -> String {
    let sc = parse_scenario(file).unwrap();
    let mut cfg = ArenaConfig::new(sc);
    cfg.log_dir = log_dir;
    // 0.2 s of game time per frame keeps each command inside its hold window.
    cfg.pacing = Pacing {
        broadcast_hz: 50.0,
        realtime_factor: 10.0,
    };
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(pursuit_arena::serve(listener, cfg));
    format!("ws://{addr}/arena")
}

fn parse(msg: Message) -> Option<ServerMessage> {
    match msg {
        Message::Text(t) => Some(serde_json::from_str(t.as_str()).unwrap()),
        _ => None,
    }
}

/// Plays until the server reports a finished game, calling `steer` on every
/// state frame to pick the next `(heading, speed)`.
async fn play(url: &str, mut steer: impl FnMut(&StateFrame) -> ([f64; 2], f64)) -> StateFrame {
    let (mut ws, _) = tokio_tungstenite::connect_async(url).await.unwrap();
    ws.send(Message::text(r#"{"type":"start"}"#)).await.unwrap();
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(20), ws.next())
            .await
            .expect("server went quiet")
            .expect("stream ended")
            .unwrap();
        match parse(msg) {
            Some(ServerMessage::State(f)) => {
                if f.status == Status::Finished {
                    return f;
                }
                let (h, s) = steer(&f);
                let text = serde_json::json!({"type": "control", "heading": h, "speed": s});
                ws.send(Message::text(text.to_string())).await.unwrap();
            }
            Some(ServerMessage::Error { msg }) => panic!("server error: {msg}"),
            None => {}
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn random_player_is_captured_over_the_wire() {
    let url = spawn_arena(include_str!("../../../scenarios/arena.toml")).await;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut prev: Option<StateFrame> = None;
    let last = play(&url, |f| {
        if let Some(p) = &prev {
            assert!(f.evader.distance(p.evader) <= 0.5 * (f.t - p.t) + 1e-9);
            assert!(f.v >= p.v - 1e-6);
        }
        prev = Some(f.clone());
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        ([th.cos(), th.sin()], rng.random_range(0.0..1.5))
    })
    .await;
    let o = last.outcome.expect("finished frame carries the outcome");
    assert_eq!(o.kind, "captured");
    assert!(o.x_f.unwrap().distance(last.cap.c) <= last.cap.r + 1e-6);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn bad_frames_get_an_error_reply() {
    let url = spawn_arena(include_str!("../../../scenarios/arena.toml")).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str()).await.unwrap();
    let first = parse(ws.next().await.unwrap().unwrap());
    assert!(matches!(first, Some(ServerMessage::State(ref f)) if f.status == Status::Ready));
    ws.send(Message::text("{\"type\":\"warp\"}")).await.unwrap();
    let reply = parse(ws.next().await.unwrap().unwrap());
    assert!(matches!(reply, Some(ServerMessage::Error { .. })), "{reply:?}");
    ws.send(Message::binary(vec![1u8, 2, 3])).await.unwrap();
    let reply = parse(ws.next().await.unwrap().unwrap());
    assert!(matches!(reply, Some(ServerMessage::Error { .. })), "{reply:?}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_connections_play_separate_games() {
    let url = spawn_arena(include_str!("../../../scenarios/two_wall_bang_bang.toml")).await;
    let up = play(&url, |_| ([0.0, 1.0], 1.0));
    let still = play(&url, |_| ([0.0, 0.0], 0.0));
    let (up, still) = tokio::join!(up, still);
    let o = up.outcome.unwrap();
    assert_eq!(o.monitor.as_deref(), Some("strategy_wall_reached"));
    assert_eq!(still.outcome.unwrap().kind, "captured");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn finished_game_is_saved_as_a_replayable_scenario() {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("arena-logs");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let url = spawn_arena_logging(include_str!("../../../scenarios/arena.toml"), Some(dir.clone())).await;
    let mut turn = 0.0f64;
    let last = play(&url, |_| {
        turn += 0.7;
        ([turn.cos(), turn.sin()], 1.0)
    })
    .await;
    let (t_live, x_live) = match last.outcome {
        Some(ref o) => (o.t_f.unwrap(), o.x_f.unwrap()),
        None => panic!("no outcome"),
    };
    let mut saved = Vec::new();
    for _ in 0..100 {
        saved = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
        if !saved.is_empty() {
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    assert_eq!(saved.len(), 1, "{saved:?}");
    let sc = parse_scenario(&std::fs::read_to_string(&saved[0]).unwrap()).unwrap();
    let p = sc.prepare().unwrap();
    let (mut pursuer, mut evader) = (p.pursuer.clone(), p.evader.clone());
    let res = pursuit_core::engine::run(
        &p.config,
        p.pursuer_position,
        p.evader_position,
        &mut pursuer,
        &mut evader,
        p.targets.as_ref(),
    )
    .unwrap();
    let (t, x) = res.outcome.terminal().unwrap();
    assert!(res.outcome.is_captured());
    assert!((t - t_live).abs() <= 1e-9 && x.distance(x_live) <= 1e-9);
}
