//! Pursuer and evader control laws as state-to-velocity maps.
//!
//! Pursuers always move at unit speed, so a pursuer policy returns a heading.
//! Evader policies return a velocity whose norm never exceeds the evader's
//! speed bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{apollonius_disc, capture_disc, offsets, Disc, Offsets, SpeedRatio, Vec2};

/// How long an external control stays in force without a fresh message.
pub const CONTROL_HOLD: f64 = 0.25;

/// Default dispersal-surface tie tolerance, multiplied by the scenario scale.
pub const TIE_TOL: f64 = 1e-12;

/// Positions of both agents plus every quantity derived from them.
///
/// Derived fields are private and recomputed on every position change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameState {
    t: f64,
    pursuer: Vec2,
    evader: Vec2,
    nu: SpeedRatio,
    cap: Disc,
    r: Vec2,
    ac: Disc,
    off: Offsets,
}

impl GameState {
    pub fn new(t: f64, pursuer: Vec2, evader: Vec2, nu: SpeedRatio, cap: Disc) -> Result<Self> {
        if !pursuer.is_finite() {
            return Err(Error::NonFinite("pursuer position"));
        }
        if !evader.is_finite() {
            return Err(Error::NonFinite("evader position"));
        }
        let ac = apollonius_disc(pursuer, evader, nu);
        Ok(Self {
            t,
            pursuer,
            evader,
            nu,
            cap,
            r: evader - pursuer,
            ac,
            off: offsets(&ac, &cap),
        })
    }

    /// State at the start of a game: the capture disc is the current
    /// Apollonius disc inflated by `delta`.
    pub fn initial(pursuer: Vec2, evader: Vec2, nu: SpeedRatio, delta: f64) -> Result<Self> {
        let ac = apollonius_disc(pursuer, evader, nu);
        let cap = capture_disc(&ac, delta)?;
        Self::new(0.0, pursuer, evader, nu, cap)
    }

    /// Same game, new time and positions.
    pub fn advanced(&self, t: f64, pursuer: Vec2, evader: Vec2) -> Result<Self> {
        Self::new(t, pursuer, evader, self.nu, self.cap)
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn pursuer(&self) -> Vec2 {
        self.pursuer
    }
    pub fn evader(&self) -> Vec2 {
        self.evader
    }
    pub fn nu(&self) -> SpeedRatio {
        self.nu
    }
    pub fn cap(&self) -> Disc {
        self.cap
    }
    /// Line of sight `x_E - x_P`.
    pub fn r(&self) -> Vec2 {
        self.r
    }
    pub fn distance(&self) -> f64 {
        self.r.norm()
    }
    pub fn ac(&self) -> Disc {
        self.ac
    }
    pub fn offsets(&self) -> Offsets {
        self.off
    }

    fn r_hat(&self) -> Result<Vec2> {
        self.r.normalized().ok_or(Error::Degenerate)
    }
}

/// `z_P = (R_C - R_A) r_hat + nu y`.
pub fn z_pursuer(state: &GameState) -> Result<Vec2> {
    let r_hat = state.r_hat()?;
    let gap = state.cap.radius - state.ac.radius;
    Ok(r_hat * gap + state.off.y * state.nu.get())
}

/// `z_E = nu (R_C - R_A) r_hat + y`, the evader-side counterpart used in the
/// `V` derivative bound.
pub fn z_evader(state: &GameState) -> Result<Vec2> {
    let r_hat = state.r_hat()?;
    let gap = state.cap.radius - state.ac.radius;
    Ok(r_hat * (state.nu.get() * gap) + state.off.y)
}

/// Heading of the guaranteed law, `z_P / |z_P|`.
pub fn guaranteed_direction(state: &GameState) -> Result<Vec2> {
    z_pursuer(state)?
        .normalized()
        .ok_or(Error::SingularPolicy)
}

pub fn pure_pursuit_direction(state: &GameState) -> Result<Vec2> {
    state.r_hat()
}

/// Two vertical target walls at `x = -half_width` and `x = +half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Walls {
    pub half_width: f64,
}

/// Aim points of the two-wall game: the extreme lateral points of the
/// Apollonius disc and their horizontal gaps to the walls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AimPoints {
    pub i1: Vec2,
    pub i2: Vec2,
    pub d1: f64,
    pub d2: f64,
}

impl AimPoints {
    pub fn min_gap(&self) -> f64 {
        self.d1.min(self.d2)
    }
}

/// Computes `I1`, `I2`, `d1`, `d2` without checking for wall contact.
pub fn aim_points_unchecked(ac: &Disc, walls: Walls) -> AimPoints {
    let lateral = Vec2::new(ac.radius, 0.0);
    let i1 = ac.center - lateral;
    let i2 = ac.center + lateral;
    AimPoints {
        i1,
        i2,
        d1: i1.x + walls.half_width,
        d2: walls.half_width - i2.x,
    }
}

pub fn aim_points(state: &GameState, walls: Walls) -> Result<AimPoints> {
    let a = aim_points_unchecked(&state.ac, walls);
    if a.d1 <= 0.0 || a.d2 <= 0.0 {
        return Err(Error::WallReached { d1: a.d1, d2: a.d2 });
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    AlwaysLeft,
    AlwaysRight,
    /// Fair coin from the strategy's seeded generator.
    SeededCoin,
}

/// Bang-bang two-wall pursuer: head for the aim point nearer its wall.
#[derive(Clone, Debug)]
pub struct BangBang {
    pub walls: Walls,
    pub tie_break: TieBreak,
    pub tie_tol: f64,
    rng: ChaCha8Rng,
}

impl BangBang {
    pub fn new(walls: Walls, tie_break: TieBreak, seed: u64) -> Self {
        Self {
            walls,
            tie_break,
            tie_tol: TIE_TOL,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_tie_tol(mut self, tie_tol: f64) -> Self {
        self.tie_tol = tie_tol;
        self
    }

    pub fn direction(&mut self, state: &GameState) -> Result<Vec2> {
        bang_bang_direction(state, self.walls, self.tie_break, self.tie_tol, &mut self.rng)
    }
}

pub fn bang_bang_direction<R: Rng>(
    state: &GameState,
    walls: Walls,
    tie_break: TieBreak,
    tie_tol: f64,
    rng: &mut R,
) -> Result<Vec2> {
    if state.distance() == 0.0 {
        return Err(Error::Degenerate);
    }
    let a = aim_points(state, walls)?;
    let go_left = if (a.d1 - a.d2).abs() <= tie_tol {
        match tie_break {
            TieBreak::AlwaysLeft => true,
            TieBreak::AlwaysRight => false,
            TieBreak::SeededCoin => rng.random_bool(0.5),
        }
    } else {
        a.d1 < a.d2
    };
    let aim = if go_left { a.i1 } else { a.i2 };
    (aim - state.pursuer).normalized().ok_or(Error::Degenerate)
}

/// Bang-bang pursuer that switches to pure pursuit for `commit_time` whenever
/// the state comes within `trigger_width` of the dispersal surface.
#[derive(Clone, Debug)]
pub struct Deadzone {
    pub inner: BangBang,
    pub commit_time: f64,
    pub trigger_width: f64,
    pub committed_until: f64,
}

impl Deadzone {
    pub fn new(inner: BangBang, commit_time: f64, trigger_width: f64) -> Result<Self> {
        if !(commit_time > 0.0) {
            return Err(Error::Domain {
                name: "commit_time",
                expect: "> 0",
                value: commit_time,
            });
        }
        if !(trigger_width > 0.0) {
            return Err(Error::Domain {
                name: "trigger_width",
                expect: "> 0",
                value: trigger_width,
            });
        }
        Ok(Self {
            inner,
            commit_time,
            trigger_width,
            committed_until: f64::NEG_INFINITY,
        })
    }

    /// Heuristic commitment length `2 eps_s / (1 - nu)`.
    pub fn default_commit_time(trigger_width: f64, nu: SpeedRatio) -> f64 {
        2.0 * trigger_width / (1.0 - nu.get())
    }

    pub fn direction(&mut self, state: &GameState) -> Result<Vec2> {
        let t = state.t();
        if t < self.committed_until {
            return pure_pursuit_direction(state);
        }
        let a = aim_points(state, self.inner.walls)?;
        if (a.d1 - a.d2).abs() <= self.trigger_width {
            self.committed_until = t + self.commit_time;
            return pure_pursuit_direction(state);
        }
        self.inner.direction(state)
    }
}

/// A control law for the (unit-speed) pursuer.
pub trait PursuerPolicy {
    /// Unit heading for the current state.
    fn direction(&mut self, state: &GameState) -> Result<Vec2>;

    /// Whether the capture-guarantee monitors apply to this policy.
    fn is_guaranteed(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug)]
pub enum PursuerStrategy {
    /// Steers along `z_P`; the capture disc comes from the game state.
    Guaranteed,
    PurePursuit,
    TwoTargetBangBang(BangBang),
    Deadzone(Deadzone),
}

impl PursuerPolicy for PursuerStrategy {
    fn direction(&mut self, state: &GameState) -> Result<Vec2> {
        match self {
            PursuerStrategy::Guaranteed => guaranteed_direction(state),
            PursuerStrategy::PurePursuit => pure_pursuit_direction(state),
            PursuerStrategy::TwoTargetBangBang(b) => b.direction(state),
            PursuerStrategy::Deadzone(d) => d.direction(state),
        }
    }

    fn is_guaranteed(&self) -> bool {
        matches!(self, PursuerStrategy::Guaranteed)
    }
}

/// One leg of a scripted evader: hold `heading` at `speed_fraction * nu`
/// for `duration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSegment {
    pub duration: f64,
    pub heading: Vec2,
    pub speed_fraction: f64,
}

/// Latest command from an external controller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Control {
    pub heading: Vec2,
    pub speed_fraction: f64,
}

impl Control {
    pub const STOP: Control = Control {
        heading: Vec2::ZERO,
        speed_fraction: 0.0,
    };

    /// Clamps the speed into `[0, 1]` and normalizes the heading; a zero or
    /// non-finite heading means "stand still".
    pub fn admissible(heading: Vec2, speed: f64) -> Control {
        let speed_fraction = if speed.is_finite() {
            speed.clamp(0.0, 1.0)
        } else {
            0.0
        };
        match heading.normalized() {
            Some(h) if h.is_finite() => Control {
                heading: h,
                speed_fraction,
            },
            _ => Control::STOP,
        }
    }
}

/// Control input fed by an outside source.
///
/// A command stays in force for [`CONTROL_HOLD`] of simulated time after it
/// was submitted; after that the evader stops until the next command.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlFeed {
    last: Control,
    submitted_at: f64,
    pub hold: f64,
}

impl Default for ControlFeed {
    fn default() -> Self {
        Self {
            last: Control::STOP,
            submitted_at: f64::NEG_INFINITY,
            hold: CONTROL_HOLD,
        }
    }
}

impl ControlFeed {
    pub fn submit(&mut self, control: Control, now: f64) {
        self.last = Control::admissible(control.heading, control.speed_fraction);
        self.submitted_at = now;
    }

    /// Control in force at `now`.
    pub fn current(&self, now: f64) -> Control {
        if now - self.submitted_at > self.hold {
            Control::STOP
        } else {
            self.last
        }
    }
}

/// A control law for the evader.
pub trait EvaderPolicy {
    /// Velocity with norm at most `max_speed`. `dt` lets point-seeking
    /// behaviour land on its target instead of overshooting.
    fn velocity(&mut self, state: &GameState, max_speed: f64, dt: f64) -> Vec2;
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvaderStrategy {
    ToPoint {
        target: Vec2,
        stop_on_arrival: bool,
    },
    ConstantHeading {
        heading: Vec2,
    },
    /// Run straight away from `from`.
    RadialEscape {
        from: Vec2,
    },
    /// `v_E = nu z_E / |z_E|`, the evader choice that minimises the `V`
    /// derivative against the guaranteed law.
    WorstCase,
    Scripted(Vec<ScriptSegment>),
    External(ControlFeed),
}

/// Distance below which a point-seeking evader counts as arrived.
pub const ARRIVAL_TOL: f64 = 1e-12;

impl EvaderStrategy {
    pub fn to_point(target: Vec2) -> Self {
        EvaderStrategy::ToPoint {
            target,
            stop_on_arrival: true,
        }
    }

    pub fn constant_heading(heading: Vec2) -> Result<Self> {
        let heading = heading.normalized().ok_or(Error::Config(
            "constant heading must be a nonzero vector".into(),
        ))?;
        Ok(EvaderStrategy::ConstantHeading { heading })
    }

    /// Heading `(0, 1)`.
    pub fn straight_up() -> Self {
        EvaderStrategy::ConstantHeading {
            heading: Vec2::new(0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EvaderStrategy::ToPoint { target, .. } if !target.is_finite() => {
                Err(Error::NonFinite("evader target"))
            }
            EvaderStrategy::ConstantHeading { heading } if heading.normalized().is_none() => Err(
                Error::Config("constant heading must be a nonzero vector".into()),
            ),
            EvaderStrategy::Scripted(segs) => {
                for s in segs {
                    if !(s.duration >= 0.0) || !s.duration.is_finite() {
                        return Err(Error::Config(format!(
                            "script segment duration must be finite and >= 0, got {}",
                            s.duration
                        )));
                    }
                    if !(0.0..=1.0).contains(&s.speed_fraction) {
                        return Err(Error::Config(format!(
                            "script speed_fraction must lie in [0, 1], got {}",
                            s.speed_fraction
                        )));
                    }
                    if !s.heading.is_finite() {
                        return Err(Error::NonFinite("script heading"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Segment in force at `t`. Boundaries are matched with a small slack so
/// that segments whose durations are whole multiples of `dt` line up with
/// step times despite rounding.
fn script_segment_at(segments: &[ScriptSegment], t: f64) -> Option<&ScriptSegment> {
    const SLACK: f64 = 1e-9;
    let mut end = 0.0;
    for s in segments {
        end += s.duration;
        if t + SLACK < end {
            return Some(s);
        }
    }
    None
}

impl EvaderPolicy for EvaderStrategy {
    fn velocity(&mut self, state: &GameState, max_speed: f64, dt: f64) -> Vec2 {
        let x = state.evader();
        match self {
            EvaderStrategy::ToPoint {
                target,
                stop_on_arrival,
            } => {
                let to_go = *target - x;
                let dist = to_go.norm();
                if dist <= ARRIVAL_TOL {
                    return if *stop_on_arrival {
                        Vec2::ZERO
                    } else {
                        // Keep going past the point along the approach line.
                        let h = (*target - state.pursuer()).normalized().unwrap_or(Vec2::ZERO);
                        h * max_speed
                    };
                }
                if *stop_on_arrival && dist <= max_speed * dt {
                    to_go / dt
                } else {
                    to_go / dist * max_speed
                }
            }
            EvaderStrategy::ConstantHeading { heading } => {
                heading.normalized().unwrap_or(Vec2::ZERO) * max_speed
            }
            EvaderStrategy::RadialEscape { from } => {
                (x - *from).normalized().unwrap_or(Vec2::ZERO) * max_speed
            }
            EvaderStrategy::WorstCase => z_evader(state)
                .ok()
                .and_then(Vec2::normalized)
                .unwrap_or(Vec2::ZERO)
                * max_speed,
            EvaderStrategy::Scripted(segments) => match script_segment_at(segments, state.t()) {
                Some(s) => {
                    s.heading.normalized().unwrap_or(Vec2::ZERO)
                        * (max_speed * s.speed_fraction.clamp(0.0, 1.0))
                }
                None => Vec2::ZERO,
            },
            EvaderStrategy::External(feed) => {
                let c = feed.current(state.t());
                c.heading * (max_speed * c.speed_fraction)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn nu(v: f64) -> SpeedRatio {
        SpeedRatio::new(v).unwrap()
    }

    fn unit_state(n: f64, delta: f64) -> GameState {
        GameState::initial(Vec2::ZERO, Vec2::new(0.0, 1.0), nu(n), delta).unwrap()
    }

    #[test]
    fn z_pursuer_at_start_is_delta_times_los() {
        let s = GameState::initial(Vec2::new(0.3, -1.0), Vec2::new(1.2, 0.4), nu(0.7), 0.2)
            .unwrap();
        let z = z_pursuer(&s).unwrap();
        let r_hat = s.r().normalized().unwrap();
        assert_abs_diff_eq!(z.x, 0.2 * r_hat.x, epsilon = 1e-12);
        assert_abs_diff_eq!(z.y, 0.2 * r_hat.y, epsilon = 1e-12);
        assert_abs_diff_eq!(z.norm(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn z_pursuer_after_teleport() {
        // Translate both agents so that y = (0.1, 0) while R_A is unchanged.
        let s0 = unit_state(0.5, 0.1);
        let shift = Vec2::new(0.1, 0.0);
        let s = s0.advanced(0.0, shift, Vec2::new(0.0, 1.0) + shift).unwrap();
        assert_abs_diff_eq!(s.offsets().y.x, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.ac().radius, s0.ac().radius, epsilon = 1e-15);
        let z = z_pursuer(&s).unwrap();
        assert_abs_diff_eq!(z.x, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(z.y, 0.1, epsilon = 1e-12);

        let h = guaranteed_direction(&s).unwrap();
        let e = Vec2::new(1.0, 2.0) / 5f64.sqrt();
        assert_abs_diff_eq!(h.x, e.x, epsilon = 1e-12);
        assert_abs_diff_eq!(h.y, e.y, epsilon = 1e-12);
    }

    #[test]
    fn z_vanishes_when_ac_fills_cap_concentrically() {
        let s = unit_state(0.5, 0.1);
        let tight = GameState::new(0.0, s.pursuer(), s.evader(), s.nu(), s.ac()).unwrap();
        assert_eq!(z_pursuer(&tight).unwrap(), Vec2::ZERO);
        assert_eq!(z_evader(&tight).unwrap(), Vec2::ZERO);
        assert_eq!(guaranteed_direction(&tight), Err(Error::SingularPolicy));
    }

    #[test]
    fn z_evader_at_start() {
        let s = unit_state(0.6, 0.2);
        let z = z_evader(&s).unwrap();
        assert_abs_diff_eq!(z.norm(), 0.6 * 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(z.y, 0.12, epsilon = 1e-12);
    }

    #[test]
    fn z_identity_off_start() {
        let s0 = unit_state(0.6, 0.2);
        let s = s0
            .advanced(1.0, Vec2::new(0.05, 0.1), Vec2::new(-0.1, 1.03))
            .unwrap();
        let zp = z_pursuer(&s).unwrap().norm_sq();
        let ze = z_evader(&s).unwrap().norm_sq();
        assert_abs_diff_eq!(zp - ze, (1.0 - 0.36) * s.offsets().v, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_state_errors() {
        let s = unit_state(0.5, 0.1);
        let c = s.advanced(0.0, Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(z_pursuer(&c), Err(Error::Degenerate));
        assert_eq!(pure_pursuit_direction(&c), Err(Error::Degenerate));
        assert_eq!(c.ac().radius, 0.0);
    }

    #[test]
    fn pure_pursuit_example() {
        let s = GameState::initial(Vec2::ZERO, Vec2::new(3.0, 4.0), nu(0.5), 0.1).unwrap();
        assert_eq!(pure_pursuit_direction(&s).unwrap(), Vec2::new(0.6, 0.8));
        assert_eq!(
            guaranteed_direction(&s).unwrap(),
            pure_pursuit_direction(&s).unwrap()
        );
    }

    #[test]
    fn guaranteed_direction_is_continuous() {
        let s = GameState::initial(Vec2::ZERO, Vec2::new(0.0, 1.0), nu(0.8), 0.3).unwrap();
        let s1 = s
            .advanced(0.5, Vec2::new(0.2, 0.4), Vec2::new(0.6, 1.1))
            .unwrap();
        let s2 = s1
            .advanced(0.5, s1.pursuer(), s1.evader() + Vec2::new(7e-7, -7e-7))
            .unwrap();
        let a = guaranteed_direction(&s1).unwrap();
        let b = guaranteed_direction(&s2).unwrap();
        assert!(a.angle_to(b) <= 1e-3);
    }

    fn walls_for(s: &GameState, gap: f64) -> Walls {
        Walls {
            half_width: s.ac().center.x.abs() + s.ac().radius + gap,
        }
    }

    #[test]
    fn bang_bang_symmetric_tie_goes_right() {
        let s = GameState::initial(Vec2::ZERO, Vec2::new(0.0, 0.8), nu(0.677), 0.1).unwrap();
        let walls = walls_for(&s, 0.3);
        let a = aim_points(&s, walls).unwrap();
        assert_abs_diff_eq!(a.d1, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(a.d2, 0.3, epsilon = 1e-12);

        let mut bb = BangBang::new(walls, TieBreak::AlwaysRight, 0);
        let h = bb.direction(&s).unwrap();
        let i2 = Vec2::new(s.ac().radius, s.ac().center.y);
        let e = i2.normalized().unwrap();
        assert_abs_diff_eq!(h.x, e.x, epsilon = 1e-12);
        assert_abs_diff_eq!(h.y, e.y, epsilon = 1e-12);
        let cos_psi = h.dot(s.r().normalized().unwrap());
        assert_abs_diff_eq!(cos_psi, 1.0 / (1.0f64 + 0.677 * 0.677).sqrt(), epsilon = 1e-12);

        let mut bb = BangBang::new(walls, TieBreak::AlwaysLeft, 0);
        assert!(bb.direction(&s).unwrap().x < 0.0);
    }

    #[test]
    fn bang_bang_off_surface() {
        let s0 = GameState::initial(Vec2::ZERO, Vec2::new(0.0, 0.8), nu(0.677), 0.1).unwrap();
        let walls = walls_for(&s0, 0.3);
        let left = s0.advanced(0.0, Vec2::ZERO, Vec2::new(-0.01, 0.8)).unwrap();
        let a = aim_points(&left, walls).unwrap();
        assert!(a.d1 < a.d2);
        let mut bb = BangBang::new(walls, TieBreak::AlwaysRight, 0);
        let h = bb.direction(&left).unwrap();
        let e = (a.i1 - left.pursuer()).normalized().unwrap();
        assert_abs_diff_eq!(h.x, e.x, epsilon = 1e-15);

        let right = s0.advanced(0.0, Vec2::ZERO, Vec2::new(0.01, 0.8)).unwrap();
        let a = aim_points(&right, walls).unwrap();
        assert!(a.d2 < a.d1);
    }

    #[test]
    fn aim_points_are_closest_to_walls() {
        // Brute force over 360 boundary samples of the disc.
        let s = GameState::initial(Vec2::new(0.2, -0.1), Vec2::new(0.4, 0.7), nu(0.6), 0.1)
            .unwrap();
        let walls = walls_for(&s, 0.5);
        let a = aim_points(&s, walls).unwrap();
        let ac = s.ac();
        let samples: Vec<Vec2> = (0..360)
            .map(|k| ac.boundary_point((k as f64).to_radians()))
            .collect();
        let best_left = samples
            .iter()
            .min_by(|p, q| (p.x + walls.half_width).total_cmp(&(q.x + walls.half_width)))
            .unwrap();
        let best_right = samples
            .iter()
            .min_by(|p, q| (walls.half_width - p.x).total_cmp(&(walls.half_width - q.x)))
            .unwrap();
        assert!(best_left.distance(a.i1) < 1e-9);
        assert!(best_right.distance(a.i2) < 1e-9);
        assert_abs_diff_eq!(a.d1, best_left.x + walls.half_width, epsilon = 1e-12);
    }

    #[test]
    fn bang_bang_errors_once_wall_reached() {
        let s = GameState::initial(Vec2::ZERO, Vec2::new(0.0, 0.8), nu(0.677), 0.1).unwrap();
        let walls = walls_for(&s, -0.01);
        let mut bb = BangBang::new(walls, TieBreak::SeededCoin, 3);
        assert!(matches!(bb.direction(&s), Err(Error::WallReached { .. })));
    }

    #[test]
    fn seeded_coin_is_reproducible() {
        let s = GameState::initial(Vec2::ZERO, Vec2::new(0.0, 0.8), nu(0.677), 0.1).unwrap();
        let walls = walls_for(&s, 0.3);
        let draw = |seed| {
            let mut bb = BangBang::new(walls, TieBreak::SeededCoin, seed);
            (0..32)
                .map(|_| bb.direction(&s).unwrap().x > 0.0)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        let sides = draw(11);
        assert!(sides.iter().any(|&b| b) && sides.iter().any(|&b| !b));
    }

    #[test]
    fn deadzone_commits_on_surface() {
        let s0 = GameState::initial(Vec2::ZERO, Vec2::new(0.0, 0.8), nu(0.677), 0.1).unwrap();
        let walls = walls_for(&s0, 0.3);
        let s = s0.advanced(2.0, s0.pursuer(), s0.evader()).unwrap();
        let mut dz = Deadzone::new(BangBang::new(walls, TieBreak::AlwaysRight, 0), 0.5, 0.01)
            .unwrap();
        let h = dz.direction(&s).unwrap();
        assert_eq!(h, Vec2::new(0.0, 1.0));
        assert_eq!(dz.committed_until, 2.5);

        // Still committed off the surface.
        let off = s0.advanced(2.2, Vec2::ZERO, Vec2::new(0.2, 0.8)).unwrap();
        assert_eq!(dz.direction(&off).unwrap(), off.r().normalized().unwrap());
    }

    #[test]
    fn deadzone_off_surface_matches_bang_bang() {
        let s0 = GameState::initial(Vec2::ZERO, Vec2::new(0.0, 0.8), nu(0.677), 0.1).unwrap();
        let walls = walls_for(&s0, 0.3);
        let off = s0.advanced(1.0, Vec2::ZERO, Vec2::new(0.1, 0.8)).unwrap();
        let mut dz = Deadzone::new(BangBang::new(walls, TieBreak::AlwaysRight, 0), 0.5, 0.01)
            .unwrap();
        let mut bb = BangBang::new(walls, TieBreak::AlwaysRight, 0);
        assert_eq!(dz.direction(&off).unwrap(), bb.direction(&off).unwrap());
        assert!(Deadzone::new(bb.clone(), 0.0, 0.01).is_err());
        assert!(Deadzone::new(bb, 0.5, 0.0).is_err());
    }

    #[test]
    fn evader_examples() {
        let s = unit_state(0.5, 0.1);
        let mut e = EvaderStrategy::to_point(Vec2::new(0.0, 2.0));
        assert_eq!(e.velocity(&s, 0.5, 1e-3), Vec2::new(0.0, 0.5));

        let s85 = unit_state(0.85, 0.1);
        let mut e = EvaderStrategy::straight_up();
        assert_eq!(e.velocity(&s85, 0.85, 1e-3), Vec2::new(0.0, 0.85));

        let mut e = EvaderStrategy::Scripted(vec![ScriptSegment {
            duration: 1.0,
            heading: Vec2::new(1.0, 0.0),
            speed_fraction: 0.5,
        }]);
        let mid = s.advanced(0.5, s.pursuer(), s.evader()).unwrap();
        assert_eq!(e.velocity(&mid, 0.5, 1e-3), Vec2::new(0.25, 0.0));
        let after = s.advanced(1.5, s.pursuer(), s.evader()).unwrap();
        assert_eq!(e.velocity(&after, 0.5, 1e-3), Vec2::ZERO);
    }

    #[test]
    fn to_point_lands_and_waits() {
        let s = unit_state(0.5, 0.1);
        let target = Vec2::new(0.0, 1.0002);
        let mut e = EvaderStrategy::to_point(target);
        let v = e.velocity(&s, 0.5, 1e-3);
        assert!(v.norm() <= 0.5);
        let landed = s.advanced(1e-3, s.pursuer(), s.evader() + v * 1e-3).unwrap();
        assert_abs_diff_eq!(landed.evader().y, target.y, epsilon = 1e-15);
        assert_eq!(e.velocity(&landed, 0.5, 1e-3), Vec2::ZERO);
    }

    #[test]
    fn worst_case_evader_opposes_z_evader() {
        let s0 = unit_state(0.6, 0.2);
        let s = s0
            .advanced(1.0, Vec2::new(0.05, 0.1), Vec2::new(-0.1, 1.03))
            .unwrap();
        let v = EvaderStrategy::WorstCase.velocity(&s, 0.6, 1e-3);
        assert_abs_diff_eq!(v.norm(), 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(v.dot(z_evader(&s).unwrap()), 0.6 * z_evader(&s).unwrap().norm(), epsilon = 1e-12);
    }

    #[test]
    fn external_feed_holds_then_stops() {
        let s = unit_state(0.5, 0.1);
        let mut feed = ControlFeed::default();
        feed.submit(Control::admissible(Vec2::new(3.0, 4.0), 1.7), 0.0);
        let mut e = EvaderStrategy::External(feed);
        let v = e.velocity(&s, 0.5, 1e-3);
        assert_abs_diff_eq!(v.norm(), 0.5, epsilon = 1e-15);
        let held = s.advanced(0.25, s.pursuer(), s.evader()).unwrap();
        assert_abs_diff_eq!(e.velocity(&held, 0.5, 1e-3).norm(), 0.5, epsilon = 1e-15);
        let dropped = s.advanced(0.2501, s.pursuer(), s.evader()).unwrap();
        assert_eq!(e.velocity(&dropped, 0.5, 1e-3), Vec2::ZERO);
    }

    #[test]
    fn control_clamp() {
        let c = Control::admissible(Vec2::new(0.0, 2.0), 1.7);
        assert_eq!(c.speed_fraction, 1.0);
        assert_eq!(c.heading, Vec2::new(0.0, 1.0));
        assert_eq!(Control::admissible(Vec2::ZERO, 0.5), Control::STOP);
        assert_eq!(Control::admissible(Vec2::new(1.0, 0.0), -3.0).speed_fraction, 0.0);
        assert_eq!(Control::admissible(Vec2::new(f64::NAN, 0.0), 1.0), Control::STOP);
    }
}
