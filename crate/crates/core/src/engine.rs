//! Fixed-step simulation of the two-agent game with runtime invariant monitors.
//!
//! Both agents are single integrators. Each step evaluates both strategies on
//! the pre-step state and applies an explicit Euler update. Capture is
//! detected by the closest approach of the linear relative motion inside the
//! step, so a step longer than the capture tolerance cannot jump over the
//! evader.

use std::fmt;

use crate::error::{Error, Result};
use crate::games::TargetSet;
use crate::geometry::{
    capture_time_bound, delta1, lyapunov_envelope, Disc, SpeedRatio, Vec2,
};
use crate::strategies::{z_pursuer, EvaderPolicy, GameState, PursuerPolicy};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorTols {
    /// Constant part of the per-step `V` decrease allowance.
    pub v_monotone_abs: f64,
    /// Coefficient `k` of the `k (1 + nu)^2 dt^2` part of the allowance.
    pub v_monotone_dt2: f64,
    pub containment: f64,
    pub distance: f64,
    /// Relative slack on the exponential envelope.
    pub envelope_slack: f64,
}

impl Default for MonitorTols {
    fn default() -> Self {
        Self {
            v_monotone_abs: 1e-6,
            v_monotone_dt2: 4.0,
            containment: 1e-6,
            distance: 1e-6,
            envelope_slack: 0.05,
        }
    }
}

impl MonitorTols {
    pub fn v_monotone(&self, nu: f64, dt: f64) -> f64 {
        self.v_monotone_abs + self.v_monotone_dt2 * (1.0 + nu).powi(2) * dt * dt
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub capture_tol: f64,
    /// Speed ratio the pursuer plays with; sets every Apollonius disc.
    pub nu: SpeedRatio,
    pub delta: f64,
    /// True evader speed bound. Defaults to `nu`.
    pub evader_speed: Option<f64>,
    /// Evader within this distance of the target set has reached it.
    pub target_tol: f64,
    pub tols: MonitorTols,
    /// Stop with [`OutcomeKind::MonitorViolation`] when a guaranteed-law
    /// monitor fails.
    pub halt_on_violation: bool,
    /// Keep every step in the trajectory record (the final row is always kept).
    pub record: bool,
}

impl SimConfig {
    pub fn new(nu: SpeedRatio, delta: f64) -> Self {
        Self {
            dt: 1e-3,
            t_max: 100.0,
            capture_tol: 1e-3,
            nu,
            delta,
            evader_speed: None,
            target_tol: 1e-3,
            tols: MonitorTols::default(),
            halt_on_violation: true,
            record: true,
        }
    }

    pub fn evader_speed(&self) -> f64 {
        self.evader_speed.unwrap_or(self.nu.get())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain {
                    name,
                    expect: "finite and > 0",
                    value,
                })
            }
        };
        positive("dt", self.dt)?;
        positive("t_max", self.t_max)?;
        positive("capture_tol", self.capture_tol)?;
        positive("delta", self.delta)?;
        positive("target_tol", self.target_tol)?;
        let s = self.evader_speed();
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Domain {
                name: "evader_speed",
                expect: "in [0, 1)",
                value: s,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutcomeKind {
    Captured { t_f: f64, x_f: Vec2 },
    EvaderReachedTarget { t: f64, x: Vec2 },
    HorizonExceeded,
    MonitorViolation { name: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Capture tolerance the run used.
    pub capture_tol: f64,
    /// Set for strategy failures reported as violations.
    pub error: Option<StrategyFault>,
}

/// `Copy` wrapper for the strategy error that ended a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrategyFault {
    Degenerate,
    SingularPolicy,
    WallReached { d1: f64, d2: f64 },
    Other,
}

impl From<&Error> for StrategyFault {
    fn from(e: &Error) -> Self {
        match e {
            Error::Degenerate => StrategyFault::Degenerate,
            Error::SingularPolicy => StrategyFault::SingularPolicy,
            Error::WallReached { d1, d2 } => StrategyFault::WallReached { d1: *d1, d2: *d2 },
            _ => StrategyFault::Other,
        }
    }
}

impl Outcome {
    pub fn is_captured(&self) -> bool {
        matches!(self.kind, OutcomeKind::Captured { .. })
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            OutcomeKind::Captured { .. } => "captured",
            OutcomeKind::EvaderReachedTarget { .. } => "evader_reached_target",
            OutcomeKind::HorizonExceeded => "horizon_exceeded",
            OutcomeKind::MonitorViolation { .. } => "monitor_violation",
        }
    }

    /// Terminal time and evader position, when the run ended at a point.
    pub fn terminal(&self) -> Option<(f64, Vec2)> {
        match self.kind {
            OutcomeKind::Captured { t_f, x_f } => Some((t_f, x_f)),
            OutcomeKind::EvaderReachedTarget { t, x } => Some((t, x)),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OutcomeKind::Captured { t_f, x_f } => {
                write!(f, "captured t_f={t_f} x_f={},{}", x_f.x, x_f.y)?
            }
            OutcomeKind::EvaderReachedTarget { t, x } => {
                write!(f, "evader_reached_target t={t} x={},{}", x.x, x.y)?
            }
            OutcomeKind::HorizonExceeded => write!(f, "horizon_exceeded")?,
            OutcomeKind::MonitorViolation { name } => write!(f, "monitor_violation {name}")?,
        }
        write!(f, " eps_c={}", self.capture_tol)
    }
}

/// One logged step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub pursuer: Vec2,
    pub evader: Vec2,
    pub ac_center: Vec2,
    pub ac_radius: f64,
    pub y: Vec2,
    pub d_min: f64,
    pub d_max: f64,
    pub v: f64,
    /// `|z_P|`, NaN when undefined.
    pub z_norm: f64,
    /// Pursuer heading applied from this state; zero on the terminal row.
    pub heading: Vec2,
    /// Evader velocity applied from this state; zero on the terminal row.
    pub evader_velocity: Vec2,
}

impl TrajectoryRow {
    pub fn from_state(state: &GameState, heading: Vec2, evader_velocity: Vec2) -> Self {
        let ac = state.ac();
        let off = state.offsets();
        Self {
            t: state.t(),
            pursuer: state.pursuer(),
            evader: state.evader(),
            ac_center: ac.center,
            ac_radius: ac.radius,
            y: off.y,
            d_min: off.d_min,
            d_max: off.d_max,
            v: off.v,
            z_norm: z_pursuer(state).map(Vec2::norm).unwrap_or(f64::NAN),
            heading,
            evader_velocity,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    pub outcome: Outcome,
}

impl TrajectoryRecord {
    /// Largest angle between consecutive nonzero pursuer headings.
    pub fn max_heading_change(&self) -> f64 {
        self.rows
            .windows(2)
            .filter(|w| w[0].heading != Vec2::ZERO && w[1].heading != Vec2::ZERO)
            .map(|w| w[0].heading.angle_to(w[1].heading))
            .fold(0.0, f64::max)
    }

    /// Number of strict sign changes of the pursuer heading's x component.
    pub fn heading_flips(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| w[0].heading.x * w[1].heading.x < 0.0)
            .count()
    }
}

/// Outcome of one named monitor over a whole run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorResult {
    pub name: &'static str,
    pub pass: bool,
    /// Smallest `value - threshold` seen; negative means failure.
    pub worst_margin: f64,
    pub t_worst: f64,
    pub evaluations: usize,
}

impl MonitorResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            pass: true,
            worst_margin: f64::INFINITY,
            t_worst: 0.0,
            evaluations: 0,
        }
    }

    /// Records `margin` (pass iff `margin > 0`, or `>= 0` when `inclusive`).
    fn observe(&mut self, t: f64, margin: f64, inclusive: bool) -> bool {
        self.evaluations += 1;
        let ok = if inclusive { margin >= 0.0 } else { margin > 0.0 };
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.t_worst = t;
        }
        if !ok {
            self.pass = false;
        }
        ok
    }
}

impl fmt::Display for MonitorResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} margin={:.6e} t_worst={:.6}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.worst_margin,
            self.t_worst
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonitorReport {
    pub monitors: Vec<MonitorResult>,
}

impl MonitorReport {
    pub fn all_pass(&self) -> bool {
        self.monitors.iter().all(|m| m.pass)
    }

    pub fn get(&self, name: &str) -> Option<&MonitorResult> {
        self.monitors.iter().find(|m| m.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MonitorResult> {
        self.monitors.iter().filter(|m| !m.pass)
    }
}

impl fmt::Display for MonitorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.monitors {
            writeln!(f, "{m}")?;
        }
        Ok(())
    }
}

pub const M1: &str = "M1_containment";
pub const M2: &str = "M2_v_monotone";
pub const M3: &str = "M3_zp_nonzero";
pub const M4: &str = "M4_distance";
pub const M5: &str = "M5_envelope";
pub const M6: &str = "M6_capture_time";
pub const M7: &str = "M7_capture_in_cap";

/// Per-step evaluation of the invariant monitors.
///
/// M4 (distance never exceeds the initial distance) is tracked for every
/// pursuer; the rest depend on the guaranteed law and are only enabled for it.
#[derive(Clone, Debug)]
pub struct MonitorSuite {
    guaranteed: bool,
    tols: MonitorTols,
    nu: SpeedRatio,
    dt: f64,
    cap: Disc,
    delta: f64,
    r0: f64,
    v0: f64,
    prev_v: Option<f64>,
    m: [MonitorResult; 7],
}

impl MonitorSuite {
    pub fn new(initial: &GameState, guaranteed: bool, tols: MonitorTols, dt: f64) -> Self {
        let cap = initial.cap();
        Self {
            guaranteed,
            tols,
            nu: initial.nu(),
            dt,
            cap,
            delta: cap.radius - initial.ac().radius,
            r0: initial.distance(),
            v0: initial.offsets().v,
            prev_v: None,
            m: [
                MonitorResult::new(M1),
                MonitorResult::new(M2),
                MonitorResult::new(M3),
                MonitorResult::new(M4),
                MonitorResult::new(M5),
                MonitorResult::new(M6),
                MonitorResult::new(M7),
            ],
        }
    }

    /// Evaluates the per-step monitors on `state`; returns the first failing
    /// guaranteed-law monitor, if any.
    pub fn observe(&mut self, state: &GameState) -> Option<&'static str> {
        let t = state.t();
        let at_start = self.prev_v.is_none();
        let mut failed = None;
        if !at_start {
            let margin = self.r0 + self.tols.distance - state.distance();
            self.m[3].observe(t, margin, false);
        }
        if !self.guaranteed {
            self.prev_v = Some(state.offsets().v);
            return None;
        }
        let off = state.offsets();
        let mut check = |i: usize, margin: f64, inclusive: bool, m: &mut [MonitorResult; 7]| {
            if !m[i].observe(t, margin, inclusive) && failed.is_none() {
                failed = Some(m[i].name);
            }
        };
        check(0, off.d_min + self.tols.containment, false, &mut self.m);
        let zn = z_pursuer(state).map(Vec2::norm).unwrap_or(0.0);
        check(2, zn, false, &mut self.m);
        if let Some(prev) = self.prev_v {
            let tol = self.tols.v_monotone(self.nu.get(), self.dt);
            check(1, off.v - prev + tol, true, &mut self.m);
            if self.v0 > 0.0 && self.cap.radius > 0.0 {
                let env = lyapunov_envelope(self.v0, self.nu, self.cap.radius, t.max(0.0))
                    .unwrap_or(f64::INFINITY);
                check(
                    4,
                    off.v - env * (1.0 - self.tols.envelope_slack),
                    true,
                    &mut self.m,
                );
            }
        }
        self.prev_v = Some(off.v);
        failed
    }

    /// Adds the terminal checks and produces the report.
    pub fn finish(mut self, outcome: &Outcome) -> MonitorReport {
        let monitors = if self.guaranteed {
            if let OutcomeKind::Captured { t_f, x_f } = outcome.kind {
                let bound = capture_time_bound(self.nu, self.cap.radius, self.delta);
                self.m[5].observe(t_f, bound - t_f, true);
                let margin = self.cap.radius + self.tols.containment - x_f.distance(self.cap.center);
                self.m[6].observe(t_f, margin, true);
            }
            self.m.to_vec()
        } else {
            vec![self.m[3]]
        };
        MonitorReport { monitors }
    }
}

/// Heading and evader velocity chosen on a pre-step state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Controls {
    pub heading: Vec2,
    pub evader_velocity: Vec2,
}

/// Evaluates both strategies on `state` (simultaneous play).
pub fn controls(
    state: &GameState,
    pursuer: &mut dyn PursuerPolicy,
    evader: &mut dyn EvaderPolicy,
    evader_speed: f64,
    dt: f64,
) -> Result<Controls> {
    let heading = pursuer.direction(state)?;
    let evader_velocity = evader.velocity(state, evader_speed, dt).clamp_norm(evader_speed);
    Ok(Controls {
        heading,
        evader_velocity,
    })
}

/// One explicit-Euler step of length `dt`.
pub fn step(
    state: &GameState,
    pursuer: &mut dyn PursuerPolicy,
    evader: &mut dyn EvaderPolicy,
    evader_speed: f64,
    dt: f64,
) -> Result<GameState> {
    let c = controls(state, pursuer, evader, evader_speed, dt)?;
    apply(state, &c, dt, state.t() + dt)
}

fn apply(state: &GameState, c: &Controls, dt: f64, t_next: f64) -> Result<GameState> {
    state.advanced(
        t_next,
        state.pursuer() + c.heading * dt,
        state.evader() + c.evader_velocity * dt,
    )
}

/// Earliest `s` in `[0, dt]` with `|r + s w| <= tol`, if any.
pub fn first_contact(r: Vec2, w: Vec2, dt: f64, tol: f64) -> Option<f64> {
    let c = r.norm_sq() - tol * tol;
    if c <= 0.0 {
        return Some(0.0);
    }
    let a = w.norm_sq();
    if a == 0.0 {
        return None;
    }
    let b = r.dot(w);
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    // Smaller root of a s^2 + 2 b s + c = 0, in the cancellation-free form.
    let q = -b - disc.sqrt() * b.signum();
    let s = if b < 0.0 { c / q } else { q / a };
    let s = if s < 0.0 { (-b - disc.sqrt()) / a } else { s };
    (0.0..=dt).contains(&s).then_some(s)
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub initial: GameState,
    pub last: GameState,
    pub record: TrajectoryRecord,
    pub report: MonitorReport,
    pub outcome: Outcome,
    pub steps: usize,
}

impl RunResult {
    pub fn delta1(&self) -> Option<DeltaOne> {
        delta1_excess(&self.initial, &self.outcome)
    }
}

fn outcome(kind: OutcomeKind, config: &SimConfig) -> Outcome {
    Outcome {
        kind,
        capture_tol: config.capture_tol,
        error: None,
    }
}

/// A game in progress, advanced one step at a time.
///
/// [`run`] drives one of these to completion; interactive callers step it
/// themselves and may swap inputs between steps.
#[derive(Clone, Debug)]
pub struct Simulation {
    config: SimConfig,
    targets: Option<TargetSet>,
    initial: GameState,
    state: GameState,
    monitors: MonitorSuite,
    rows: Vec<TrajectoryRow>,
    steps: usize,
    max_steps: usize,
    outcome: Option<Outcome>,
    last_controls: Option<Controls>,
}

impl Simulation {
    /// Sets up the initial state; `guaranteed` enables the law-specific
    /// monitors.
    pub fn new(
        config: &SimConfig,
        pursuer_pos: Vec2,
        evader_pos: Vec2,
        guaranteed: bool,
        targets: Option<&TargetSet>,
    ) -> Result<Self> {
        config.validate()?;
        let initial = GameState::initial(pursuer_pos, evader_pos, config.nu, config.delta)?;
        if initial.distance() <= config.capture_tol {
            return Err(Error::Config(format!(
                "initial distance {} is within the capture tolerance {}",
                initial.distance(),
                config.capture_tol
            )));
        }
        let mut sim = Self {
            config: config.clone(),
            targets: targets.filter(|t| !t.is_empty()).cloned(),
            initial,
            state: initial,
            monitors: MonitorSuite::new(&initial, guaranteed, config.tols, config.dt),
            rows: Vec::new(),
            steps: 0,
            max_steps: (config.t_max / config.dt).ceil() as usize,
            outcome: None,
            last_controls: None,
        };
        if let Some(name) = sim.monitors.observe(&initial) {
            if config.halt_on_violation {
                sim.end(OutcomeKind::MonitorViolation { name });
            }
        }
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn initial(&self) -> &GameState {
        &self.initial
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    /// Controls applied on the most recent step.
    pub fn last_controls(&self) -> Option<Controls> {
        self.last_controls
    }

    pub fn rows(&self) -> &[TrajectoryRow] {
        &self.rows
    }

    fn end(&mut self, kind: OutcomeKind) -> Outcome {
        self.rows
            .push(TrajectoryRow::from_state(&self.state, Vec2::ZERO, Vec2::ZERO));
        let o = Outcome {
            kind,
            capture_tol: self.config.capture_tol,
            error: None,
        };
        self.outcome = Some(o);
        o
    }

    /// Advances one step. Returns the outcome once the game is over; further
    /// calls do nothing.
    pub fn step(
        &mut self,
        pursuer: &mut dyn PursuerPolicy,
        evader: &mut dyn EvaderPolicy,
    ) -> Result<Option<Outcome>> {
        if self.outcome.is_some() {
            return Ok(self.outcome);
        }
        if self.steps >= self.max_steps {
            return Ok(Some(self.end(OutcomeKind::HorizonExceeded)));
        }
        let dt = self.config.dt;
        let c = match controls(&self.state, pursuer, evader, self.config.evader_speed(), dt) {
            Ok(c) => c,
            Err(e) => {
                let mut o = self.end(OutcomeKind::MonitorViolation {
                    name: strategy_error_name(&e),
                });
                o.error = Some(StrategyFault::from(&e));
                self.outcome = Some(o);
                return Ok(Some(o));
            }
        };
        self.last_controls = Some(c);
        if self.config.record {
            self.rows
                .push(TrajectoryRow::from_state(&self.state, c.heading, c.evader_velocity));
        }
        let contact = first_contact(
            self.state.r(),
            c.evader_velocity - c.heading,
            dt,
            self.config.capture_tol,
        );
        self.steps += 1;
        let next = apply(&self.state, &c, dt, self.steps as f64 * dt)?;

        let reached = self
            .targets
            .as_ref()
            .is_some_and(|ts| ts.distance(next.evader()) <= self.config.target_tol);
        if reached {
            self.state = next;
            self.monitors.observe(&self.state);
            let kind = OutcomeKind::EvaderReachedTarget {
                t: next.t(),
                x: next.evader(),
            };
            return Ok(Some(self.end(kind)));
        }
        if let Some(s) = contact {
            let t_f = self.state.t() + s;
            let x_f = self.state.evader() + c.evader_velocity * s;
            let p_f = self.state.pursuer() + c.heading * s;
            self.state = self.state.advanced(t_f, p_f, x_f)?;
            self.monitors.observe(&self.state);
            return Ok(Some(self.end(OutcomeKind::Captured { t_f, x_f })));
        }
        self.state = next;
        if let Some(name) = self.monitors.observe(&self.state) {
            if self.config.halt_on_violation {
                return Ok(Some(self.end(OutcomeKind::MonitorViolation { name })));
            }
        }
        Ok(None)
    }

    /// Final report. A game still in progress is closed as out of time.
    pub fn finish(mut self) -> RunResult {
        let outcome = match self.outcome {
            Some(o) => o,
            None => self.end(OutcomeKind::HorizonExceeded),
        };
        let report = self.monitors.finish(&outcome);
        RunResult {
            initial: self.initial,
            last: self.state,
            record: TrajectoryRecord {
                rows: self.rows,
                outcome,
            },
            report,
            outcome,
            steps: self.steps,
        }
    }
}

/// Runs a single-pursuer game from `(pursuer_pos, evader_pos)` until capture,
/// target reach, the horizon, or a monitor violation.
pub fn run(
    config: &SimConfig,
    pursuer_pos: Vec2,
    evader_pos: Vec2,
    pursuer: &mut dyn PursuerPolicy,
    evader: &mut dyn EvaderPolicy,
    targets: Option<&TargetSet>,
) -> Result<RunResult> {
    let mut sim = Simulation::new(
        config,
        pursuer_pos,
        evader_pos,
        pursuer.is_guaranteed(),
        targets,
    )?;
    while sim.step(pursuer, evader)?.is_none() {}
    Ok(sim.finish())
}

fn strategy_error_name(e: &Error) -> &'static str {
    match e {
        Error::Degenerate => "strategy_degenerate",
        Error::SingularPolicy => M3,
        Error::WallReached { .. } => "strategy_wall_reached",
        _ => "strategy_error",
    }
}

/// Where the capture point sits relative to the initial Apollonius disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaOne {
    /// `max(0, |x_f - x_C| - R_A(t0))`.
    pub excess: f64,
    /// `R_C - |x_f - x_C|`.
    pub d_min_final: f64,
    /// `R_C - sqrt(R_C^2 - delta^2)`.
    pub delta1: f64,
    pub delta: f64,
}

pub fn delta1_excess(initial: &GameState, outcome: &Outcome) -> Option<DeltaOne> {
    let OutcomeKind::Captured { x_f, .. } = outcome.kind else {
        return None;
    };
    let cap = initial.cap();
    let r_a0 = initial.ac().radius;
    let dist = x_f.distance(cap.center);
    let delta = cap.radius - r_a0;
    Some(DeltaOne {
        excess: (dist - r_a0).max(0.0),
        d_min_final: cap.radius - dist,
        delta1: delta1(cap.radius, delta),
        delta,
    })
}

/// Whether the pursuer never lost a circular sensor of radius `rho`.
pub fn sensing_check(record: &TrajectoryRecord, rho: f64) -> bool {
    record
        .rows
        .iter()
        .all(|row| row.evader.distance(row.pursuer) <= rho)
}

/// One member of a pursuer team, with its own speed estimate and margin.
#[derive(Clone, Debug)]
pub struct TeamMember<P> {
    pub position: Vec2,
    pub nu: SpeedRatio,
    pub delta: f64,
    pub strategy: P,
}

#[derive(Clone, Debug)]
pub struct TeamRunResult {
    pub outcome: Outcome,
    /// Index of the capturing pursuer.
    pub captured_by: Option<usize>,
    /// Each pursuer's initial game state (and thus its capture disc).
    pub initial: Vec<GameState>,
    pub reports: Vec<MonitorReport>,
    pub evader_track: Vec<Vec2>,
    pub steps: usize,
}

/// Several pursuers, each running its own policy on its own view of the game
/// (its own speed estimate and capture disc). The pursuers share nothing;
/// the evader policy sees the state of the currently nearest pursuer.
pub fn run_team<P: PursuerPolicy>(
    config: &SimConfig,
    team: &mut [TeamMember<P>],
    evader_pos: Vec2,
    evader: &mut dyn EvaderPolicy,
    targets: Option<&TargetSet>,
) -> Result<TeamRunResult> {
    config.validate()?;
    if team.is_empty() {
        return Err(Error::Config("pursuer team is empty".into()));
    }
    let mut states = team
        .iter()
        .map(|m| GameState::initial(m.position, evader_pos, m.nu, m.delta))
        .collect::<Result<Vec<_>>>()?;
    let initial = states.clone();
    let mut monitors: Vec<MonitorSuite> = team
        .iter()
        .zip(&states)
        .map(|(m, s)| MonitorSuite::new(s, m.strategy.is_guaranteed(), config.tols, config.dt))
        .collect();
    for (m, s) in monitors.iter_mut().zip(&states) {
        m.observe(s);
    }
    let dt = config.dt;
    let speed = config.evader_speed();
    let max_steps = (config.t_max / dt).ceil() as usize;
    let mut track = vec![evader_pos];
    let mut steps = 0usize;
    let mut captured_by = None;

    let out = loop {
        if steps >= max_steps {
            break outcome(OutcomeKind::HorizonExceeded, config);
        }
        let nearest = states
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance().total_cmp(&b.1.distance()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let v_e = evader
            .velocity(&states[nearest], speed, dt)
            .clamp_norm(speed);
        let mut headings = Vec::with_capacity(team.len());
        let mut failure = None;
        for (m, s) in team.iter_mut().zip(&states) {
            match m.strategy.direction(s) {
                Ok(h) => headings.push(h),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failure {
            let mut o = outcome(
                OutcomeKind::MonitorViolation {
                    name: strategy_error_name(&e),
                },
                config,
            );
            o.error = Some(StrategyFault::from(&e));
            break o;
        }
        let evader_now = states[0].evader();
        let first = states
            .iter()
            .zip(&headings)
            .enumerate()
            .filter_map(|(i, (s, h))| {
                first_contact(s.r(), v_e - *h, dt, config.capture_tol).map(|c| (i, c))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        steps += 1;
        let t_next = steps as f64 * dt;
        if let Some((i, s)) = first {
            captured_by = Some(i);
            let x_f = evader_now + v_e * s;
            track.push(x_f);
            break outcome(
                OutcomeKind::Captured {
                    t_f: states[i].t() + s,
                    x_f,
                },
                config,
            );
        }
        let evader_next = evader_now + v_e * dt;
        for ((s, h), mon) in states.iter_mut().zip(&headings).zip(monitors.iter_mut()) {
            *s = s.advanced(t_next, s.pursuer() + *h * dt, evader_next)?;
            mon.observe(s);
        }
        track.push(evader_next);
        let reached = targets
            .filter(|ts| !ts.is_empty())
            .map(|ts| ts.distance(evader_next) <= config.target_tol)
            .unwrap_or(false);
        if reached {
            break outcome(
                OutcomeKind::EvaderReachedTarget {
                    t: t_next,
                    x: evader_next,
                },
                config,
            );
        }
    };
    let reports = monitors.into_iter().map(|m| m.finish(&out)).collect();
    Ok(TeamRunResult {
        outcome: out,
        captured_by,
        initial,
        reports,
        evader_track: track,
        steps,
    })
}
