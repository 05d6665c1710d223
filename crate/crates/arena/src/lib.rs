//! Interactive arena: a websocket client steers the evader against a
//! simulated pursuer, with state frames pushed at a fixed rate.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ClientMessage, ServerMessage, StateFrame, Status};
pub use server::{router, serve, ArenaConfig};
pub use session::{ControlLog, Pacing, Session};
