//! Scenario files (TOML) and trajectory CSV.
//!
//! A scenario names the speed ratio, capture margin, integration settings,
//! one pursuer (`[pursuer]`) or a team (`[[pursuers]]`), the evader, and an
//! optional target set and payoff field:
//!
//! ```toml
//! nu = 0.5
//! delta = 0.1          # or "auto": half the gap from the initial disc to the targets
//! dt = 1e-3
//! t_max = 100.0
//! capture_tol = 1e-3
//! seed = 0
//!
//! [pursuer]
//! position = [0.0, 0.0]
//! strategy = { kind = "guaranteed" }
//!
//! [evader]
//! position = [0.0, 1.0]
//! strategy = { kind = "to_point", target = [0.0, 2.0] }
//!
//! [[targets]]
//! kind = "point"
//! at = [0.0, 3.0]
//!
//! [field]
//! kind = "distance_to_target"
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{Outcome, OutcomeKind, SimConfig, TeamMember, TrajectoryRecord, TrajectoryRow};
use crate::error::{Error, Result};
use crate::games::{guarding_verdict, phi_star, TargetSet, ValueField, Winner};
use crate::geometry::{apollonius_disc, SpeedRatio, Vec2};
use crate::strategies::{
    BangBang, ControlFeed, Deadzone, EvaderStrategy, PursuerStrategy, ScriptSegment, TieBreak,
    Walls, TIE_TOL,
};

fn default_dt() -> f64 {
    1e-3
}
fn default_t_max() -> f64 {
    100.0
}
fn default_capture_tol() -> f64 {
    1e-3
}
fn yes() -> bool {
    true
}
fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaKeyword {
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    Value(f64),
    Keyword(DeltaKeyword),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PursuerSpec {
    Guaranteed {},
    PurePursuit {},
    BangBang {
        wall_x: f64,
        #[serde(default = "coin")]
        tie_break: TieBreak,
    },
    Deadzone {
        wall_x: f64,
        #[serde(default = "coin")]
        tie_break: TieBreak,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        commit_time: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trigger_width: Option<f64>,
    },
}

fn coin() -> TieBreak {
    TieBreak::SeededCoin
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaderSpec {
    ToPoint {
        target: Vec2,
        #[serde(default = "yes")]
        stop_on_arrival: bool,
    },
    /// Heads for a minimizer of the payoff field over the initial disc.
    ToArgmin {},
    ConstantHeading {
        heading: Vec2,
    },
    /// Runs away from `from`, by default the initial Apollonius center.
    RadialEscape {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from: Option<Vec2>,
    },
    WorstCase {},
    StraightUp {},
    Scripted {
        segments: Vec<ScriptSegment>,
    },
    /// Driven by an outside controller (the arena).
    External {},
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PursuerEntry {
    pub position: Vec2,
    pub strategy: PursuerSpec,
    /// Team members may carry their own speed estimate and margin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaderEntry {
    pub position: Vec2,
    pub strategy: EvaderSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Distance to the scenario's target set.
    DistanceToTarget {},
    Linear { a: Vec2, b: f64 },
    Radial { center: Vec2 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Speed ratio the pursuer plays with.
    pub nu: f64,
    /// Actual evader speed bound, when it differs from `nu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_true: Option<f64>,
    pub delta: DeltaSpec,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_capture_tol")]
    pub capture_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pursuer: Option<PursuerEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pursuers: Vec<PursuerEntry>,
    pub evader: EvaderEntry,
    #[serde(default, skip_serializing_if = "is_default")]
    pub targets: TargetSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
}

/// A problem found while loading a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioError {
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    Semantic {
        path: String,
        message: String,
    },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax {
                line,
                column,
                message,
            } => write!(f, "line {line}, column {column}: {message}"),
            Self::Semantic { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioErrors(pub Vec<ScenarioError>);

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ScenarioErrors {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioErrors> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ScenarioErrors(vec![ScenarioError::Syntax {
            line,
            column,
            message: e.message().trim().to_string(),
        }])
    })?;
    let errors = scenario.check();
    if errors.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioErrors(errors))
    }
}

pub fn to_toml(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario types serialize to TOML")
}

struct Checker(Vec<ScenarioError>);

impl Checker {
    fn fail(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ScenarioError::Semantic {
            path: path.into(),
            message: message.into(),
        });
    }

    fn speed(&mut self, path: &str, v: f64) {
        if !v.is_finite() || v < 0.0 {
            self.fail(path, format!("{path} must be >= 0, got {v}"));
        } else if v >= 1.0 {
            self.fail(path, format!("{path} must be < 1, got {v}"));
        }
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.fail(path, format!("{path} must be finite and > 0, got {v}"));
        }
    }

    fn point(&mut self, path: &str, v: Vec2) {
        if !v.is_finite() {
            self.fail(path, format!("{path} must be finite"));
        }
    }
}

impl Scenario {
    /// Every semantic problem, each with its key path.
    pub fn check(&self) -> Vec<ScenarioError> {
        let mut c = Checker(Vec::new());
        c.speed("nu", self.nu);
        if let Some(v) = self.nu_true {
            c.speed("nu_true", v);
        }
        match self.delta {
            DeltaSpec::Value(d) => c.positive("delta", d),
            DeltaSpec::Keyword(DeltaKeyword::Auto) => {
                if self.targets.is_empty() {
                    c.fail("delta", "delta = \"auto\" needs a non-empty targets list");
                }
            }
        }
        c.positive("dt", self.dt);
        c.positive("t_max", self.t_max);
        c.positive("capture_tol", self.capture_tol);
        match (&self.pursuer, self.pursuers.is_empty()) {
            (None, true) => c.fail("pursuer", "exactly one of [pursuer] or [[pursuers]] is required"),
            (Some(_), false) => c.fail("pursuers", "give either [pursuer] or [[pursuers]], not both"),
            _ => {}
        }
        let entries = self
            .pursuer
            .iter()
            .map(|p| ("pursuer".to_string(), p))
            .chain(
                self.pursuers
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (format!("pursuers[{i}]"), p)),
            );
        for (path, p) in entries {
            c.point(&format!("{path}.position"), p.position);
            if let Some(v) = p.nu {
                c.speed(&format!("{path}.nu"), v);
            }
            if let Some(d) = p.delta {
                c.positive(&format!("{path}.delta"), d);
            }
            if p.position.is_finite() && p.position == self.evader.position {
                c.fail(format!("{path}.position"), "pursuer and evader must start apart");
            }
            match &p.strategy {
                PursuerSpec::BangBang { wall_x, .. } => {
                    c.positive(&format!("{path}.strategy.wall_x"), *wall_x)
                }
                PursuerSpec::Deadzone {
                    wall_x,
                    commit_time,
                    trigger_width,
                    ..
                } => {
                    c.positive(&format!("{path}.strategy.wall_x"), *wall_x);
                    if let Some(t) = commit_time {
                        c.positive(&format!("{path}.strategy.commit_time"), *t);
                    }
                    if let Some(w) = trigger_width {
                        c.positive(&format!("{path}.strategy.trigger_width"), *w);
                    }
                }
                PursuerSpec::Guaranteed {} | PursuerSpec::PurePursuit {} => {}
            }
        }
        c.point("evader.position", self.evader.position);
        match &self.evader.strategy {
            EvaderSpec::ToPoint { target, .. } => c.point("evader.strategy.target", *target),
            EvaderSpec::ConstantHeading { heading } => {
                if heading.normalized().is_none() || !heading.is_finite() {
                    c.fail("evader.strategy.heading", "heading must be a nonzero finite vector");
                }
            }
            EvaderSpec::RadialEscape { from: Some(f) } => c.point("evader.strategy.from", *f),
            EvaderSpec::Scripted { segments } => {
                for (i, s) in segments.iter().enumerate() {
                    let p = format!("evader.strategy.segments[{i}]");
                    if !(s.duration >= 0.0 && s.duration.is_finite()) {
                        c.fail(format!("{p}.duration"), "duration must be finite and >= 0");
                    }
                    if !(0.0..=1.0).contains(&s.speed_fraction) {
                        c.fail(format!("{p}.speed_fraction"), "speed_fraction must be in [0, 1]");
                    }
                    if !s.heading.is_finite() {
                        c.fail(format!("{p}.heading"), "heading must be finite");
                    }
                }
            }
            EvaderSpec::ToArgmin {} if self.field.is_none() => {
                c.fail("evader.strategy", "to_argmin needs a [field]");
            }
            _ => {}
        }
        for (i, t) in self.targets.primitives.iter().enumerate() {
            if let Err(e) = t.validate() {
                c.fail(format!("targets[{i}]"), e.to_string());
            }
        }
        if matches!(self.field, Some(FieldSpec::DistanceToTarget {})) && self.targets.is_empty() {
            c.fail("field", "distance_to_target needs a non-empty targets list");
        }
        c.0
    }

    pub fn scale(&self) -> f64 {
        let p = self
            .pursuer
            .as_ref()
            .or(self.pursuers.first())
            .map_or(Vec2::ZERO, |p| p.position);
        p.distance(self.evader.position).max(1.0)
    }

    pub fn value_field(&self) -> Option<ValueField> {
        self.field.as_ref().map(|f| match f {
            FieldSpec::DistanceToTarget {} => ValueField::DistanceToTarget {
                targets: self.targets.clone(),
            },
            FieldSpec::Linear { a, b } => ValueField::Linear { a: *a, b: *b },
            FieldSpec::Radial { center } => ValueField::Radial { center: *center },
        })
    }

    fn single(&self) -> Result<&PursuerEntry> {
        self.pursuer
            .as_ref()
            .or(self.pursuers.first())
            .ok_or_else(|| Error::Config("scenario has no pursuer".into()))
    }

    /// Resolves `delta`, running the guarding analysis for `"auto"`.
    pub fn resolve_delta(&self, pursuer: Vec2, nu: SpeedRatio) -> Result<f64> {
        match self.delta {
            DeltaSpec::Value(d) => Ok(d),
            DeltaSpec::Keyword(DeltaKeyword::Auto) => {
                let v = guarding_verdict(pursuer, self.evader.position, nu, &self.targets)?;
                match v.winner {
                    Winner::Pursuer => Ok(v.delta_selected),
                    Winner::Evader => Err(Error::Config(format!(
                        "delta = \"auto\" but the initial disc already reaches the targets (phi* = {})",
                        v.phi_star
                    ))),
                }
            }
        }
    }

    fn sim_config(&self, nu: SpeedRatio, delta: f64) -> SimConfig {
        let mut cfg = SimConfig::new(nu, delta);
        cfg.dt = self.dt;
        cfg.t_max = self.t_max;
        cfg.capture_tol = self.capture_tol;
        cfg.evader_speed = self.nu_true;
        cfg.target_tol = 1e-3 * self.scale();
        cfg
    }

    fn pursuer_strategy(&self, spec: &PursuerSpec) -> Result<PursuerStrategy> {
        let tie_tol = TIE_TOL * self.scale();
        Ok(match spec {
            PursuerSpec::Guaranteed {} => PursuerStrategy::Guaranteed,
            PursuerSpec::PurePursuit {} => PursuerStrategy::PurePursuit,
            PursuerSpec::BangBang { wall_x, tie_break } => PursuerStrategy::TwoTargetBangBang(
                BangBang::new(Walls { half_width: *wall_x }, *tie_break, self.seed)
                    .with_tie_tol(tie_tol),
            ),
            PursuerSpec::Deadzone {
                wall_x,
                tie_break,
                commit_time,
                trigger_width,
            } => {
                let nu = SpeedRatio::new(self.nu)?;
                let width = trigger_width.unwrap_or(2.0 * self.nu * self.dt);
                let commit = commit_time.unwrap_or(Deadzone::default_commit_time(width, nu));
                PursuerStrategy::Deadzone(Deadzone::new(
                    BangBang::new(Walls { half_width: *wall_x }, *tie_break, self.seed)
                        .with_tie_tol(tie_tol),
                    commit,
                    width,
                )?)
            }
        })
    }

    fn evader_strategy(&self, pursuer: Vec2, nu: SpeedRatio) -> Result<EvaderStrategy> {
        let start = self.evader.position;
        let s = match &self.evader.strategy {
            EvaderSpec::ToPoint {
                target,
                stop_on_arrival,
            } => EvaderStrategy::ToPoint {
                target: *target,
                stop_on_arrival: *stop_on_arrival,
            },
            EvaderSpec::ToArgmin {} => {
                let field = self
                    .value_field()
                    .ok_or_else(|| Error::Config("to_argmin needs a field".into()))?;
                let m = phi_star(&field, &apollonius_disc(pursuer, start, nu));
                EvaderStrategy::to_point(m.minimizers.first().copied().unwrap_or(start))
            }
            EvaderSpec::ConstantHeading { heading } => EvaderStrategy::constant_heading(*heading)?,
            EvaderSpec::RadialEscape { from } => EvaderStrategy::RadialEscape {
                from: from.unwrap_or_else(|| apollonius_disc(pursuer, start, nu).center),
            },
            EvaderSpec::WorstCase {} => EvaderStrategy::WorstCase,
            EvaderSpec::StraightUp {} => EvaderStrategy::straight_up(),
            EvaderSpec::Scripted { segments } => EvaderStrategy::Scripted(segments.clone()),
            EvaderSpec::External {} => EvaderStrategy::External(ControlFeed::default()),
        };
        s.validate()?;
        Ok(s)
    }

    /// Everything needed for a single-pursuer run.
    pub fn prepare(&self) -> Result<Prepared> {
        let entry = self.single()?;
        let nu = SpeedRatio::new(entry.nu.unwrap_or(self.nu))?;
        let delta = match entry.delta {
            Some(d) => d,
            None => self.resolve_delta(entry.position, nu)?,
        };
        let config = self.sim_config(nu, delta);
        config.validate()?;
        Ok(Prepared {
            config,
            pursuer_position: entry.position,
            evader_position: self.evader.position,
            pursuer: self.pursuer_strategy(&entry.strategy)?,
            evader: self.evader_strategy(entry.position, nu)?,
            targets: (!self.targets.is_empty()).then(|| self.targets.clone()),
            field: self.value_field(),
        })
    }

    /// Team members for a multi-pursuer run; a single `[pursuer]` gives a
    /// team of one.
    pub fn prepare_team(&self) -> Result<(SimConfig, Vec<TeamMember<PursuerStrategy>>, EvaderStrategy)> {
        let entries: Vec<&PursuerEntry> = match &self.pursuer {
            Some(p) => vec![p],
            None => self.pursuers.iter().collect(),
        };
        let base_nu = SpeedRatio::new(self.nu)?;
        let mut team = Vec::with_capacity(entries.len());
        for e in &entries {
            let nu = SpeedRatio::new(e.nu.unwrap_or(self.nu))?;
            let delta = match e.delta {
                Some(d) => d,
                None => self.resolve_delta(e.position, nu)?,
            };
            team.push(TeamMember {
                position: e.position,
                nu,
                delta,
                strategy: self.pursuer_strategy(&e.strategy)?,
            });
        }
        let first = entries
            .first()
            .ok_or_else(|| Error::Config("scenario has no pursuer".into()))?;
        let delta = team[0].delta;
        let config = self.sim_config(base_nu, delta);
        config.validate()?;
        let evader = self.evader_strategy(first.position, base_nu)?;
        Ok((config, team, evader))
    }
}

/// A scenario resolved into engine inputs.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: SimConfig,
    pub pursuer_position: Vec2,
    pub evader_position: Vec2,
    pub pursuer: PursuerStrategy,
    pub evader: EvaderStrategy,
    pub targets: Option<TargetSet>,
    pub field: Option<ValueField>,
}

pub const CSV_HEADER: [&str; 18] = [
    "t", "xP", "yP", "xE", "yE", "xA", "yA", "R_A", "y_x", "y_y", "d_min", "d_max", "V", "znorm",
    "hP_x", "hP_y", "vE_x", "vE_y",
];

/// Formats `x` with 12 significant digits, like C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn row_fields(r: &TrajectoryRow) -> [f64; 18] {
    [
        r.t,
        r.pursuer.x,
        r.pursuer.y,
        r.evader.x,
        r.evader.y,
        r.ac_center.x,
        r.ac_center.y,
        r.ac_radius,
        r.y.x,
        r.y.y,
        r.d_min,
        r.d_max,
        r.v,
        r.z_norm,
        r.heading.x,
        r.heading.y,
        r.evader_velocity.x,
        r.evader_velocity.y,
    ]
}

/// Comment line closing a trajectory file.
pub fn outcome_line(outcome: &Outcome) -> String {
    let eps = fmt_sig(outcome.capture_tol);
    match outcome.kind {
        OutcomeKind::Captured { t_f, x_f } => format!(
            "# outcome=captured t_f={} x_f={},{} eps_c={eps}",
            fmt_sig(t_f),
            fmt_sig(x_f.x),
            fmt_sig(x_f.y)
        ),
        OutcomeKind::EvaderReachedTarget { t, x } => format!(
            "# outcome=evader_reached_target t_f={} x_f={},{} eps_c={eps}",
            fmt_sig(t),
            fmt_sig(x.x),
            fmt_sig(x.y)
        ),
        OutcomeKind::HorizonExceeded => format!("# outcome=horizon_exceeded eps_c={eps}"),
        OutcomeKind::MonitorViolation { name } => {
            format!("# outcome=monitor_violation monitor={name} eps_c={eps}")
        }
    }
}

pub fn write_trajectory<W: std::io::Write>(record: &TrajectoryRecord, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &record.rows {
        w.write_record(row_fields(r).iter().map(|v| fmt_sig(*v)))?;
    }
    w.flush()?;
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    writeln!(out, "{}", outcome_line(&record.outcome))
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut buf = Vec::new();
    write_trajectory(record, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Parsed trajectory file: numeric rows and the trailing outcome line.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryCsv {
    pub header: Vec<String>,
    pub rows: Vec<[f64; 18]>,
    pub outcome_line: Option<String>,
}

impl TrajectoryCsv {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_trajectory(text: &str) -> Result<TrajectoryCsv> {
    let bad = |m: String| Error::Config(format!("trajectory CSV: {m}"));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(bad(format!("expected {} columns, got {}", CSV_HEADER.len(), rec.len())));
        }
        let mut row = [0.0; 18];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse()
                .map_err(|_| bad(format!("not a number: '{field}'")))?;
        }
        rows.push(row);
    }
    let outcome_line = text
        .lines()
        .rev()
        .find(|l| l.starts_with("# outcome="))
        .map(str::to_string);
    Ok(TrajectoryCsv {
        header,
        rows,
        outcome_line,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
nu = 0.5
delta = 0.1

[pursuer]
position = [0.0, 0.0]
strategy = { kind = "guaranteed" }

[evader]
position = [0.0, 1.0]
strategy = { kind = "to_point", target = [0.0, 2.0] }
"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.nu, 0.5);
        assert_eq!(s.delta, DeltaSpec::Value(0.1));
        assert_eq!(s.dt, 1e-3);
        let p = s.prepare().unwrap();
        assert_eq!(p.pursuer_position, Vec2::ZERO);
        assert!(matches!(p.evader, EvaderStrategy::ToPoint { .. }));
    }

    #[test]
    fn nu_above_one_is_semantic_error() {
        let text = MINIMAL.replace("nu = 0.5", "nu = 1.2");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("nu must be < 1"), "{err}");
        assert!(matches!(&err.0[0], ScenarioError::Semantic { path, .. } if path == "nu"));
    }

    #[test]
    fn unknown_key_is_located_error() {
        let text = MINIMAL.replace("delta = 0.1", "delta = 0.1\ndleta = 0.2");
        let err = parse_scenario(&text).unwrap_err();
        match &err.0[0] {
            ScenarioError::Syntax { line, message, .. } => {
                assert!(*line > 0);
                assert!(message.contains("dleta"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
        let text = MINIMAL.replace("kind = \"guaranteed\"", "kind = \"guaranteed\", speed = 2");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn syntax_error_has_line_and_column() {
        let err = parse_scenario("nu = 0.5\ndelta = = 1\n").unwrap_err();
        match &err.0[0] {
            ScenarioError::Syntax { line, column, .. } => {
                assert_eq!(*line, 2);
                assert!(*column > 1);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn auto_delta_uses_guarding_margin() {
        let text = MINIMAL.replace("delta = 0.1", "delta = \"auto\"")
            + "\n[[targets]]\nkind = \"point\"\nat = [0.0, 3.0]\n";
        let s = parse_scenario(&text).unwrap();
        let p = s.prepare().unwrap();
        assert!((p.config.delta - 0.5).abs() < 1e-12);
        let text = MINIMAL.replace("delta = 0.1", "delta = \"auto\"");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn both_pursuer_forms_rejected() {
        let text = MINIMAL.to_string()
            + "\n[[pursuers]]\nposition = [1.0, 0.0]\nstrategy = { kind = \"guaranteed\" }\n";
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("not both"));
    }

    #[test]
    fn serialize_round_trip() {
        let s = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&to_toml(&s)).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(1.5e15), "1.5e15");
        assert_eq!(fmt_sig(2.0 / 3.0 * 1e-3), "0.000666666666667");
        for x in [1.0 / 7.0, -3.25e-9, 6.02e23, 0.1 + 0.2] {
            let back: f64 = fmt_sig(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11);
        }
    }
}
