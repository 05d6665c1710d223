//! Randomized verification of the guaranteed law: many seeded scenarios, each
//! played against a fixed family of evaders, with every monitor checked.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{run, DeltaOne, MonitorReport, Outcome, SimConfig, M1, M2, M3, M4, M5, M6, M7};
use crate::error::Result;
use crate::geometry::{capture_time_bound, SpeedRatio, Vec2};
use crate::strategies::{EvaderStrategy, GameState, PursuerStrategy, ScriptSegment};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub runs: usize,
    pub seed: u64,
    pub nu_range: (f64, f64),
    pub r0_range: (f64, f64),
    /// Capture-disc margin as a fraction of the initial Apollonius radius.
    pub delta_fraction: f64,
    pub dt: f64,
    pub capture_tol: f64,
    pub parallel: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            runs: 200,
            seed: 7,
            nu_range: (0.1, 0.9),
            r0_range: (0.5, 2.0),
            delta_fraction: 0.1,
            dt: 1e-3,
            capture_tol: 1e-3,
            parallel: true,
        }
    }
}

pub const EVADER_KINDS: [&str; 5] = [
    "to_point",
    "constant_heading",
    "radial_escape",
    "scripted",
    "straight_up",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RandomScenario {
    pub index: usize,
    pub pursuer: Vec2,
    pub evader: Vec2,
    pub nu: SpeedRatio,
    pub delta: f64,
    /// One evader per entry of [`EVADER_KINDS`].
    pub evaders: Vec<EvaderStrategy>,
}

fn unit(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::from_angle(rng.random::<f64>() * std::f64::consts::TAU)
}

/// Scenario `index` of the suite; independent of how many others are drawn.
pub fn random_scenario(cfg: &SuiteConfig, index: usize) -> Result<RandomScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let nu = SpeedRatio::new(rng.random_range(cfg.nu_range.0..cfg.nu_range.1))?;
    let r0 = rng.random_range(cfg.r0_range.0..cfg.r0_range.1);
    let pursuer = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let evader = pursuer + unit(&mut rng) * r0;
    let probe = GameState::initial(pursuer, evader, nu, 1.0)?;
    let ac = probe.ac();
    let delta = cfg.delta_fraction * ac.radius;

    let interior = ac.center + unit(&mut rng) * (ac.radius * rng.random::<f64>().sqrt());
    let heading = unit(&mut rng);
    let script = (0..5)
        .map(|_| ScriptSegment {
            duration: rng.random_range(0.2..2.0),
            heading: unit(&mut rng),
            speed_fraction: rng.random_range(0.5..=1.0),
        })
        .collect();
    let evaders = vec![
        EvaderStrategy::to_point(interior),
        EvaderStrategy::constant_heading(heading)?,
        EvaderStrategy::RadialEscape { from: ac.center },
        EvaderStrategy::Scripted(script),
        EvaderStrategy::straight_up(),
    ];
    Ok(RandomScenario {
        index,
        pursuer,
        evader,
        nu,
        delta,
        evaders,
    })
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub scenario: usize,
    pub evader: &'static str,
    pub nu: f64,
    pub r0: f64,
    pub delta: f64,
    pub cap_radius: f64,
    pub outcome: Outcome,
    pub report: MonitorReport,
    pub delta1: Option<DeltaOne>,
    pub time_bound: f64,
    pub steps: usize,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.outcome.is_captured() && self.report.all_pass()
    }
}

/// Plays the guaranteed pursuer against every evader of one scenario.
pub fn run_scenario(cfg: &SuiteConfig, sc: &RandomScenario) -> Result<Vec<RunSummary>> {
    let initial = GameState::initial(sc.pursuer, sc.evader, sc.nu, sc.delta)?;
    let cap = initial.cap();
    let bound = capture_time_bound(sc.nu, cap.radius, sc.delta);
    let mut sim = SimConfig::new(sc.nu, sc.delta);
    sim.dt = cfg.dt;
    sim.capture_tol = cfg.capture_tol;
    sim.t_max = 1.2 * bound + 1.0;
    sim.record = false;
    sc.evaders
        .iter()
        .zip(EVADER_KINDS)
        .map(|(ev, kind)| {
            let mut ev = ev.clone();
            let res = run(
                &sim,
                sc.pursuer,
                sc.evader,
                &mut PursuerStrategy::Guaranteed,
                &mut ev,
                None,
            )?;
            Ok(RunSummary {
                scenario: sc.index,
                evader: kind,
                nu: sc.nu.get(),
                r0: initial.distance(),
                delta: sc.delta,
                cap_radius: cap.radius,
                delta1: res.delta1(),
                outcome: res.outcome,
                report: res.report,
                time_bound: bound,
                steps: res.steps,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub runs: Vec<RunSummary>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.runs.iter().all(RunSummary::passed)
    }

    pub fn captured(&self) -> usize {
        self.runs.iter().filter(|r| r.outcome.is_captured()).count()
    }

    /// `(name, passes)` for each monitor, over all runs.
    pub fn monitor_pass_counts(&self) -> Vec<(&'static str, usize)> {
        [M1, M2, M3, M4, M5, M6, M7]
            .into_iter()
            .map(|name| {
                let n = self
                    .runs
                    .iter()
                    .filter(|r| r.report.get(name).is_some_and(|m| m.pass))
                    .count();
                (name, n)
            })
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter(|r| !r.passed())
    }
}

/// Runs the whole suite; results are in scenario order either way.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let one = |i: usize| random_scenario(cfg, i).and_then(|sc| run_scenario(cfg, &sc));
    let nested: Vec<Vec<RunSummary>> = if cfg.parallel {
        (0..cfg.runs).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.runs).map(one).collect::<Result<_>>()?
    };
    Ok(SuiteReport {
        runs: nested.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenarios_are_reproducible_and_in_range() {
        let cfg = SuiteConfig::default();
        for i in 0..20 {
            let a = random_scenario(&cfg, i).unwrap();
            let b = random_scenario(&cfg, i).unwrap();
            assert_eq!(a, b);
            let r0 = a.pursuer.distance(a.evader);
            assert!((0.5..2.0).contains(&(r0 + 1e-12)) || (r0 - 2.0).abs() < 1e-12);
            assert!((0.1..0.9).contains(&a.nu.get()));
            assert_eq!(a.evaders.len(), EVADER_KINDS.len());
        }
        assert_ne!(
            random_scenario(&cfg, 0).unwrap(),
            random_scenario(&cfg, 1).unwrap()
        );
    }

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig {
            runs: 4,
            parallel: false,
            ..SuiteConfig::default()
        };
        let rep = run_suite(&cfg).unwrap();
        assert_eq!(rep.runs.len(), 20);
        let first = rep.failures().next();
        if let Some(r) = first {
            panic!("{} {} {}\n{}", r.scenario, r.evader, r.outcome, r.report);
        }
    }
}
