//! JSON frames exchanged over the `/arena` websocket.
//!
//! Client to server, one JSON object per text frame:
//!
//! ```text
//! {"type":"control","heading":[hx,hy],"speed":s}   speed is a fraction of the evader maximum
//! {"type":"start"}  {"type":"pause"}  {"type":"reset"}
//! ```
//!
//! Server to client: `{"type":"state", ...}` at the broadcast rate and
//! `{"type":"error","msg":...}` for rejected input.

use pursuit_core::engine::{Outcome, OutcomeKind};
use pursuit_core::games::TargetSet;
use pursuit_core::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Control { heading: [f64; 2], speed: f64 },
    Start {},
    Pause {},
    Reset {},
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ready,
    Running,
    Paused,
    Finished,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscFrame {
    pub c: Vec2,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFrame {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_f: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<String>,
    pub eps_c: f64,
}

impl From<&Outcome> for OutcomeFrame {
    fn from(o: &Outcome) -> Self {
        let mut f = OutcomeFrame {
            kind: o.label().to_string(),
            t_f: None,
            x_f: None,
            monitor: None,
            eps_c: o.capture_tol,
        };
        match o.kind {
            OutcomeKind::Captured { t_f, x_f } => {
                f.t_f = Some(t_f);
                f.x_f = Some(x_f);
            }
            OutcomeKind::EvaderReachedTarget { t, x } => {
                f.t_f = Some(t);
                f.x_f = Some(x);
            }
            OutcomeKind::HorizonExceeded => {}
            OutcomeKind::MonitorViolation { name } => f.monitor = Some(name.to_string()),
        }
        f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub t: f64,
    pub step: usize,
    pub status: Status,
    pub pursuer: Vec2,
    pub evader: Vec2,
    pub evader_velocity: Vec2,
    pub ac: DiscFrame,
    pub cap: DiscFrame,
    pub d_min: f64,
    #[serde(rename = "V")]
    pub v: f64,
    /// Absent when the steering vector is undefined (agents coincide).
    pub znorm: Option<f64>,
    pub targets: TargetSet,
    pub outcome: Option<OutcomeFrame>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ServerMessage {
    State(StateFrame),
    Error { msg: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames contain only finite numbers and strings")
    }
}
