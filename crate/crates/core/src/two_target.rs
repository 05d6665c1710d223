//! Two-wall guarding game: the bang-bang pursuer chatters on the dispersal
//! surface `d1 = d2`, and a straight-up evader exploits it when the speed
//! ratio is above a threshold. The guaranteed law captures in every case.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{run, OutcomeKind, RunResult, SimConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::games::{TargetPrimitive, TargetSet};
use crate::geometry::{apollonius_disc, Disc, SpeedRatio, Vec2};
use crate::strategies::{
    aim_points_unchecked, pure_pursuit_direction, BangBang, Deadzone, EvaderPolicy, GameState,
    PursuerPolicy, PursuerStrategy, TieBreak, Walls,
};

/// Rate of change of `|r|` for a straight-up evader against a pursuer
/// chattering on the dispersal surface: `nu - 1/sqrt(1 + nu^2)`.
pub fn predicted_divergence_rate(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain {
            name: "nu",
            expect: "in (0, 1)",
            value: nu,
        });
    }
    Ok(nu - 1.0 / (1.0 + nu * nu).sqrt())
}

/// Speed ratio above which the straight-up evader gains distance: the
/// positive root of `nu^4 + nu^2 - 1`.
pub fn threshold_nu() -> f64 {
    ((5f64.sqrt() - 1.0) / 2.0).sqrt()
}

/// Half-extent of the wall segments; effectively infinite for the lab.
const WALL_EXTENT: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoTargetScenario {
    /// Walls at `x = -wall_x` and `x = +wall_x`.
    pub wall_x: f64,
    pub pursuer: Vec2,
    pub evader: Vec2,
    pub nu: SpeedRatio,
    pub dt: f64,
    pub t_max: f64,
    pub capture_tol: f64,
    pub seed: u64,
    pub tie_break: TieBreak,
}

impl TwoTargetScenario {
    /// Symmetric start with the pursuer at the origin, the evader at
    /// `(0, separation)`, and each wall `gap` beyond the Apollonius disc.
    pub fn symmetric(nu: SpeedRatio, separation: f64, gap: f64) -> Result<Self> {
        let pursuer = Vec2::ZERO;
        let evader = Vec2::new(0.0, separation);
        let ac = apollonius_disc(pursuer, evader, nu);
        let s = Self {
            wall_x: ac.radius + gap,
            pursuer,
            evader,
            nu,
            dt: 1e-4,
            t_max: 60.0,
            capture_tol: 1e-3,
            seed: 0,
            tie_break: TieBreak::SeededCoin,
        };
        s.validate()?;
        Ok(s)
    }

    /// The preset used for the divergence experiments: `|r0| = 0.8` and a 0.3
    /// gap to each wall.
    pub fn preset(nu: f64) -> Result<Self> {
        Self::symmetric(SpeedRatio::new(nu)?, 0.8, 0.3)
    }

    pub fn walls(&self) -> Walls {
        Walls {
            half_width: self.wall_x,
        }
    }

    pub fn targets(&self) -> TargetSet {
        let wall = |x: f64| TargetPrimitive::VerticalLine {
            x,
            y_range: [-WALL_EXTENT, WALL_EXTENT],
        };
        TargetSet::new(vec![wall(-self.wall_x), wall(self.wall_x)])
    }

    pub fn initial_ac(&self) -> Disc {
        apollonius_disc(self.pursuer, self.evader, self.nu)
    }

    pub fn initial_gaps(&self) -> (f64, f64) {
        let a = aim_points_unchecked(&self.initial_ac(), self.walls());
        (a.d1, a.d2)
    }

    /// `|x_P.x|, |x_E.x|` within `tol` of the midline.
    pub fn is_singular_start(&self, tol: f64) -> bool {
        self.pursuer.x.abs() <= tol && self.evader.x.abs() <= tol
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain {
                    name,
                    expect: "finite and > 0",
                    value: v,
                })
            }
        };
        positive("wall_x", self.wall_x)?;
        positive("dt", self.dt)?;
        positive("t_max", self.t_max)?;
        positive("capture_tol", self.capture_tol)?;
        if !self.pursuer.is_finite() || !self.evader.is_finite() {
            return Err(Error::NonFinite("two-target positions"));
        }
        let (d1, d2) = self.initial_gaps();
        if d1 <= 0.0 || d2 <= 0.0 {
            return Err(Error::WallReached { d1, d2 });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabPursuer {
    BangBang,
    Deadzone,
    Guaranteed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabEvader {
    AimI1,
    AimI2,
    StraightUp,
}

impl std::str::FromStr for LabPursuer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bang_bang" | "bang-bang" => Ok(Self::BangBang),
            "deadzone" => Ok(Self::Deadzone),
            "guaranteed" => Ok(Self::Guaranteed),
            _ => Err(Error::Config(format!(
                "unknown pursuer '{s}' (expected bang_bang, deadzone or guaranteed)"
            ))),
        }
    }
}

impl std::str::FromStr for LabEvader {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aim_i1" | "aim-i1" => Ok(Self::AimI1),
            "aim_i2" | "aim-i2" => Ok(Self::AimI2),
            "straight_up" | "straight-up" => Ok(Self::StraightUp),
            _ => Err(Error::Config(format!(
                "unknown evader '{s}' (expected aim_i1, aim_i2 or straight_up)"
            ))),
        }
    }
}

/// Lab pursuer. Once the disc reaches a wall the switching laws have no aim
/// point left; they fall back to pure pursuit.
struct Pursuer {
    kind: Inner,
}

enum Inner {
    Switching(Box<PursuerStrategy>),
    Guaranteed,
}

impl PursuerPolicy for Pursuer {
    fn direction(&mut self, state: &GameState) -> Result<Vec2> {
        match &mut self.kind {
            Inner::Switching(s) => match s.direction(state) {
                Err(Error::WallReached { .. }) => pure_pursuit_direction(state),
                other => other,
            },
            Inner::Guaranteed => PursuerStrategy::Guaranteed.direction(state),
        }
    }

    fn is_guaranteed(&self) -> bool {
        matches!(self.kind, Inner::Guaranteed)
    }
}

/// Lab evader. Plays its nominal law until its Apollonius disc touches a
/// wall, then runs straight for the touching point, which it reaches first.
struct Evader {
    kind: LabEvader,
    walls: Walls,
    goal: Option<Vec2>,
}

impl EvaderPolicy for Evader {
    fn velocity(&mut self, state: &GameState, max_speed: f64, dt: f64) -> Vec2 {
        let ac = state.ac();
        let a = aim_points_unchecked(&ac, self.walls);
        if self.goal.is_none() && a.min_gap() <= 0.0 {
            let x = if a.d1 <= a.d2 {
                -self.walls.half_width
            } else {
                self.walls.half_width
            };
            self.goal = Some(Vec2::new(x, ac.center.y));
        }
        let aim = match (self.goal, self.kind) {
            (Some(g), _) => {
                let d = g - state.evader();
                // Land exactly on the wall instead of overshooting.
                return d.clamp_norm(max_speed * dt) / dt.max(f64::MIN_POSITIVE);
            }
            (None, LabEvader::StraightUp) => return Vec2::new(0.0, max_speed),
            (None, LabEvader::AimI1) => a.i1,
            (None, LabEvader::AimI2) => a.i2,
        };
        (aim - state.evader())
            .normalized()
            .map(|u| u * max_speed)
            .unwrap_or(Vec2::ZERO)
    }
}

/// Summary of one lab run.
#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub pursuer: LabPursuer,
    pub evader: LabEvader,
    pub nu: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub r_series: Vec<f64>,
    /// `d1 - d2` per step.
    pub gap_difference: Vec<f64>,
    /// Least-squares slope of `|r|` against time over the fit window.
    pub fitted_rate: f64,
    pub fit_window: (f64, f64),
    pub predicted_rate: Option<f64>,
    /// Sign changes of the pursuer heading's x component over the run.
    pub flip_count: usize,
    /// Steps with `|d1 - d2| <= 2 nu dt`, and the heading flips into them.
    pub near_surface_steps: usize,
    pub near_surface_flips: usize,
    /// Largest per-step pursuer heading change, radians.
    pub max_heading_change: f64,
    /// Capture-disc margin, for guaranteed runs.
    pub delta: Option<f64>,
    pub run: RunResult,
}

impl DivergenceReport {
    pub fn record(&self) -> &TrajectoryRecord {
        &self.run.record
    }

    pub fn near_surface_flip_fraction(&self) -> f64 {
        if self.near_surface_steps == 0 {
            0.0
        } else {
            self.near_surface_flips as f64 / self.near_surface_steps as f64
        }
    }
}

impl fmt::Display for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pursuer={:?} evader={:?} nu={} dt={}", self.pursuer, self.evader, self.nu, self.dt)?;
        writeln!(f, "outcome={}", self.run.outcome)?;
        write!(
            f,
            "fitted_rate={:.6} window=[{:.4}, {:.4}]",
            self.fitted_rate, self.fit_window.0, self.fit_window.1
        )?;
        match self.predicted_rate {
            Some(p) => writeln!(f, " predicted_rate={p:.6}")?,
            None => writeln!(f)?,
        }
        writeln!(
            f,
            "flips={} near_surface_steps={} near_surface_flips={} max_heading_change={:.3e}",
            self.flip_count, self.near_surface_steps, self.near_surface_flips, self.max_heading_change
        )?;
        if let Some(d) = self.delta {
            writeln!(f, "delta={d}")?;
        }
        write!(f, "{}", self.run.report)
    }
}

/// Slope of the least-squares line through `(x, y)`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..n {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    sxy / sxx
}

/// Runs one pursuer/evader pairing of the two-wall game.
pub fn run_experiment(
    scenario: &TwoTargetScenario,
    pursuer: LabPursuer,
    evader: LabEvader,
) -> Result<DivergenceReport> {
    scenario.validate()?;
    let walls = scenario.walls();
    let (g1, g2) = scenario.initial_gaps();
    let gap0 = g1.min(g2);
    let scale = scenario.pursuer.distance(scenario.evader).max(1.0);
    let tie_tol = crate::strategies::TIE_TOL * scale;
    let bang = BangBang::new(walls, scenario.tie_break, scenario.seed).with_tie_tol(tie_tol);

    let (mut policy, delta) = match pursuer {
        LabPursuer::BangBang => (
            Pursuer {
                kind: Inner::Switching(Box::new(PursuerStrategy::TwoTargetBangBang(bang))),
            },
            None,
        ),
        LabPursuer::Deadzone => {
            let width = 2.0 * scenario.nu.get() * scenario.dt;
            let commit = Deadzone::default_commit_time(width, scenario.nu).max(10.0 * scenario.dt);
            (
                Pursuer {
                    kind: Inner::Switching(Box::new(PursuerStrategy::Deadzone(Deadzone::new(
                        bang, commit, width,
                    )?))),
                },
                None,
            )
        }
        LabPursuer::Guaranteed => (
            Pursuer {
                kind: Inner::Guaranteed,
            },
            Some(0.5 * gap0),
        ),
    };
    let mut ev = Evader {
        kind: evader,
        walls,
        goal: None,
    };

    // Without a guaranteed pursuer the capture disc only feeds diagnostics.
    let mut config = SimConfig::new(scenario.nu, delta.unwrap_or(0.5 * gap0));
    config.dt = scenario.dt;
    config.t_max = scenario.t_max;
    config.capture_tol = scenario.capture_tol;
    config.target_tol = 1e-9 * scale;
    let targets = scenario.targets();
    let result = run(
        &config,
        scenario.pursuer,
        scenario.evader,
        &mut policy,
        &mut ev,
        Some(&targets),
    )?;

    let rows = &result.record.rows;
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let r_series: Vec<f64> = rows.iter().map(|r| r.evader.distance(r.pursuer)).collect();
    let gaps: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let a = aim_points_unchecked(
                &Disc {
                    center: r.ac_center,
                    radius: r.ac_radius,
                },
                walls,
            );
            (a.d1, a.d2)
        })
        .collect();
    let gap_difference: Vec<f64> = gaps.iter().map(|(a, b)| a - b).collect();

    // Fit from the start until the disc comes within 10% of the initial gap
    // of a wall, skipping the first 5% of those steps.
    let end = gaps
        .iter()
        .position(|(a, b)| a.min(*b) <= 0.1 * gap0)
        .unwrap_or(rows.len());
    let start = end / 20;
    let fitted_rate = ls_slope(&times[start..end], &r_series[start..end]);
    let fit_window = (
        times.get(start).copied().unwrap_or(0.0),
        times.get(end.saturating_sub(1)).copied().unwrap_or(0.0),
    );

    let near = 2.0 * scenario.nu.get() * scenario.dt;
    let mut near_surface_steps = 0;
    let mut near_surface_flips = 0;
    let mut flip_count = 0;
    for i in 0..rows.len() {
        let is_near = gap_difference[i].abs() <= near && rows[i].heading != Vec2::ZERO;
        if is_near {
            near_surface_steps += 1;
        }
        if i > 0 && rows[i - 1].heading.x * rows[i].heading.x < 0.0 {
            flip_count += 1;
            if is_near {
                near_surface_flips += 1;
            }
        }
    }

    Ok(DivergenceReport {
        pursuer,
        evader,
        nu: scenario.nu.get(),
        dt: scenario.dt,
        max_heading_change: result.record.max_heading_change(),
        times,
        r_series,
        gap_difference,
        fitted_rate,
        fit_window,
        predicted_rate: predicted_divergence_rate(scenario.nu.get()).ok(),
        flip_count,
        near_surface_steps,
        near_surface_flips,
        delta,
        run: result,
    })
}

/// Whether the run ended with the evader on a wall.
pub fn evader_won(report: &DivergenceReport) -> bool {
    matches!(report.run.outcome.kind, OutcomeKind::EvaderReachedTarget { .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rate_examples() {
        assert_abs_diff_eq!(
            predicted_divergence_rate(0.85).unwrap(),
            0.85 - 1.0 / 1.7225f64.sqrt(),
            epsilon = 1e-15
        );
        assert!((predicted_divergence_rate(0.85).unwrap() - 0.0881).abs() < 5e-4);
        assert!(predicted_divergence_rate(0.786).unwrap().abs() < 1e-3);
        assert!((predicted_divergence_rate(0.5).unwrap() + 0.394).abs() < 1e-3);
        assert!(predicted_divergence_rate(0.0).is_err());
        assert!(predicted_divergence_rate(1.0).is_err());
    }

    #[test]
    fn threshold_is_the_root() {
        let t = threshold_nu();
        assert!((t.powi(4) + t * t - 1.0).abs() <= 1e-12);
        assert!((t - 0.786).abs() < 5e-4);
        assert!(predicted_divergence_rate(t).unwrap().abs() <= 1e-10);
        // Unique sign change on a grid over (0, 1).
        let signs: Vec<bool> = (1..1000)
            .map(|i| predicted_divergence_rate(i as f64 / 1000.0).unwrap() > 0.0)
            .collect();
        assert_eq!(signs.windows(2).filter(|w| w[0] != w[1]).count(), 1);
    }

    #[test]
    fn figure_construction_gaps() {
        let s = TwoTargetScenario::symmetric(SpeedRatio::new(0.677).unwrap(), 0.8, 0.3).unwrap();
        let (d1, d2) = s.initial_gaps();
        assert_abs_diff_eq!(d1, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(d2, 0.3, epsilon = 1e-12);
        let mut shifted = s.clone();
        shifted.evader.x += 0.01;
        let (d1, d2) = shifted.initial_gaps();
        assert!(d2 < d1);
    }

    #[test]
    fn rejects_wall_inside_disc() {
        let mut s = TwoTargetScenario::preset(0.85).unwrap();
        s.wall_x = 1.0;
        assert!(matches!(s.validate(), Err(Error::WallReached { .. })));
    }

    #[test]
    fn slope_of_a_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert_abs_diff_eq!(ls_slope(&x, &y), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("bang_bang".parse::<LabPursuer>().unwrap(), LabPursuer::BangBang);
        assert_eq!("straight_up".parse::<LabEvader>().unwrap(), LabEvader::StraightUp);
        assert!("sideways".parse::<LabEvader>().is_err());
    }
}
