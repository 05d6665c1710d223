//! One interactive game: a scenario, its pursuer, and an evader steered by
//! client messages. No I/O happens here; the websocket layer feeds text in and
//! forwards the frames that come back.

use pursuit_core::engine::Simulation;
use pursuit_core::scenario::{EvaderSpec, Prepared, Scenario};
use pursuit_core::strategies::{Control, ControlFeed, PursuerPolicy, ScriptSegment};
use pursuit_core::{EvaderStrategy, PursuerStrategy, Vec2};

use crate::protocol::{ClientMessage, DiscFrame, OutcomeFrame, ServerMessage, StateFrame, Status};

/// Pacing of a session.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pacing {
    /// State frames per wall-clock second.
    pub broadcast_hz: f64,
    /// Simulated seconds per wall-clock second.
    pub realtime_factor: f64,
}

impl Default for Pacing {
    fn default() -> Self {
        Self {
            broadcast_hz: 20.0,
            realtime_factor: 1.0,
        }
    }
}

impl Pacing {
    /// Engine steps per broadcast, at least one.
    pub fn substeps(&self, dt: f64) -> usize {
        let n = self.realtime_factor / (self.broadcast_hz * dt);
        if n.is_finite() {
            (n.round() as usize).max(1)
        } else {
            1
        }
    }
}

/// Applied evader controls, run-length encoded per engine step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ControlLog {
    runs: Vec<(Control, usize)>,
}

impl ControlLog {
    fn push(&mut self, c: Control) {
        match self.runs.last_mut() {
            Some((last, n)) if *last == c => *n += 1,
            _ => self.runs.push((c, 1)),
        }
    }

    pub fn steps(&self) -> usize {
        self.runs.iter().map(|(_, n)| n).sum()
    }

    /// The log as a scripted evader; replaying it through the batch engine
    /// reproduces the session.
    pub fn segments(&self, dt: f64) -> Vec<ScriptSegment> {
        self.runs
            .iter()
            .map(|(c, n)| ScriptSegment {
                duration: *n as f64 * dt,
                heading: c.heading,
                speed_fraction: c.speed_fraction,
            })
            .collect()
    }
}

#[derive(Debug)]
pub struct Session {
    scenario: Scenario,
    prepared: Prepared,
    pacing: Pacing,
    sim: Simulation,
    pursuer: PursuerStrategy,
    feed: ControlFeed,
    log: ControlLog,
    status: Status,
    /// Replays of ended games not yet collected by the transport.
    archive: Vec<Scenario>,
    archived: bool,
}

impl Session {
    /// The scenario's evader strategy is ignored: the client drives the evader.
    pub fn new(scenario: Scenario, pacing: Pacing) -> pursuit_core::Result<Self> {
        let mut prepared = scenario.prepare()?;
        prepared.config.record = true;
        let sim = fresh_sim(&prepared)?;
        Ok(Self {
            pursuer: prepared.pursuer.clone(),
            scenario,
            prepared,
            pacing,
            sim,
            feed: ControlFeed::default(),
            log: ControlLog::default(),
            status: Status::Ready,
            archive: Vec::new(),
            archived: false,
        })
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn control_log(&self) -> &ControlLog {
        &self.log
    }

    pub fn substeps(&self) -> usize {
        self.pacing.substeps(self.prepared.config.dt)
    }

    /// Handles one client text frame. Controls are silent; lifecycle commands
    /// answer with the current state; bad input answers with an error and
    /// leaves the session untouched.
    pub fn handle_text(&mut self, text: &str) -> Option<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => Some(ServerMessage::Error {
                msg: format!("bad message: {e}"),
            }),
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Option<ServerMessage> {
        match msg {
            ClientMessage::Control { heading, speed } => {
                let h = Vec2::new(heading[0], heading[1]);
                if !h.is_finite() || !speed.is_finite() {
                    return Some(ServerMessage::Error {
                        msg: "control values must be finite".into(),
                    });
                }
                self.feed
                    .submit(Control::admissible(h, speed), self.sim.state().t());
                None
            }
            ClientMessage::Start {} => {
                if self.status != Status::Finished {
                    self.status = Status::Running;
                }
                Some(self.frame())
            }
            ClientMessage::Pause {} => {
                if self.status == Status::Running {
                    self.status = Status::Paused;
                }
                Some(self.frame())
            }
            ClientMessage::Reset {} => {
                self.reset();
                Some(self.frame())
            }
        }
    }

    /// Back to the initial state with a fresh pursuer (same seed).
    pub fn reset(&mut self) {
        self.archive_current();
        self.archived = false;
        self.sim = fresh_sim(&self.prepared).expect("initial state was valid at construction");
        self.pursuer = self.prepared.pursuer.clone();
        self.feed = ControlFeed::default();
        self.log = ControlLog::default();
        self.status = Status::Ready;
    }

    /// Advances one broadcast period. Returns a frame while running and the
    /// final frame on the tick the game ends; `None` otherwise.
    pub fn tick(&mut self) -> Option<ServerMessage> {
        if self.status != Status::Running {
            return None;
        }
        for _ in 0..self.substeps() {
            let control = self.feed.current(self.sim.state().t());
            let before = self.sim.steps();
            let mut evader = EvaderStrategy::External(self.feed.clone());
            let done = match self.sim.step(&mut self.pursuer, &mut evader) {
                Ok(o) => o.is_some(),
                Err(e) => {
                    tracing::warn!("session step failed: {e}");
                    self.status = Status::Finished;
                    return Some(ServerMessage::Error {
                        msg: format!("engine error: {e}"),
                    });
                }
            };
            if self.sim.steps() > before {
                self.log.push(control);
            }
            if done {
                self.status = Status::Finished;
                self.archive_current();
                break;
            }
        }
        Some(self.frame())
    }

    pub fn frame(&self) -> ServerMessage {
        let s = self.sim.state();
        let off = s.offsets();
        let ac = s.ac();
        let cap = s.cap();
        let znorm = pursuit_core::strategies::z_pursuer(s).ok().map(|z| z.norm());
        ServerMessage::State(StateFrame {
            t: s.t(),
            step: self.sim.steps(),
            status: self.status,
            pursuer: s.pursuer(),
            evader: s.evader(),
            evader_velocity: self
                .sim
                .last_controls()
                .map_or(Vec2::ZERO, |c| c.evader_velocity),
            ac: DiscFrame {
                c: ac.center,
                r: ac.radius,
            },
            cap: DiscFrame {
                c: cap.center,
                r: cap.radius,
            },
            d_min: off.d_min,
            v: off.v,
            znorm,
            targets: self.scenario.targets.clone(),
            outcome: self.sim.outcome().as_ref().map(OutcomeFrame::from),
        })
    }

    /// The session so far as a batch scenario with a scripted evader.
    pub fn replay_scenario(&self) -> Scenario {
        let mut sc = self.scenario.clone();
        sc.evader.strategy = EvaderSpec::Scripted {
            segments: self.log.segments(self.prepared.config.dt),
        };
        sc
    }

    /// Queues the current game's replay, once, if any step was played.
    pub fn archive_current(&mut self) {
        if !self.archived && self.log.steps() > 0 {
            self.archive.push(self.replay_scenario());
            self.archived = true;
        }
    }

    /// Replays of games that ended (by outcome or reset) since the last call.
    pub fn drain_archive(&mut self) -> Vec<Scenario> {
        std::mem::take(&mut self.archive)
    }

    pub fn is_guaranteed(&self) -> bool {
        self.pursuer.is_guaranteed()
    }
}

fn fresh_sim(p: &Prepared) -> pursuit_core::Result<Simulation> {
    Simulation::new(
        &p.config,
        p.pursuer_position,
        p.evader_position,
        p.pursuer.is_guaranteed(),
        p.targets.as_ref(),
    )
}
