//! `pursuit`: run scenarios, verify the guaranteed law, and host the arena.
//!
//! Exit status: 0 when every check passes, 1 when a monitor or verification
//! fails, 2 for bad usage or unreadable input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use pursuit_core::engine::{run, run_team, OutcomeKind};
use pursuit_core::games::{critical_speed, CriticalSpeed};
use pursuit_core::scenario::{outcome_line, parse_scenario, write_trajectory, Scenario};
use pursuit_core::suite::{run_suite, SuiteConfig};
use pursuit_core::two_target::{
    evader_won, predicted_divergence_rate, run_experiment, LabEvader, LabPursuer,
    TwoTargetScenario,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "pursuit", version, about = "Pursuit-evasion simulator and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and check its monitors.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Trajectory CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized capture suite for the guaranteed pursuer.
    Verify(VerifyArgs),
    /// Smallest speed ratio at which the evader's initial disc reaches the targets.
    CriticalSpeed {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Two-wall experiment against a switching or guaranteed pursuer.
    TwoTarget(TwoTargetArgs),
    /// Capture time and capture excess of the guaranteed law over a range of
    /// speed ratios.
    Sweep {
        /// `start:stop:step`.
        #[arg(long)]
        nu: String,
        #[arg(long)]
        out: PathBuf,
        /// Geometry and evader to sweep; its speed ratio is replaced at each
        /// grid point. Defaults to a unit separation against the worst-case
        /// evader with a capture margin of a tenth of the initial disc radius.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Divergence rate of the two-wall game over a range of speed ratios.
    DivergenceSweep {
        /// `start:stop:step`.
        #[arg(long)]
        nu: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "bang_bang")]
        pursuer: String,
        #[arg(long, default_value = "straight_up")]
        evader: String,
        /// Coarser steps let the switching pursuer chatter at the scale of the
        /// capture tolerance and stall short of capture.
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
    },
    /// Serve the websocket arena at ws://HOST:PORT/arena.
    Arena {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        realtime_factor: f64,
        #[arg(long, default_value_t = 20.0)]
        hz: f64,
        /// Save each finished game's control log here as a scenario file.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// `lo:hi`.
    #[arg(long, default_value = "0.1:0.9")]
    nu_range: String,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
}

#[derive(Args)]
struct TwoTargetArgs {
    #[arg(long)]
    nu: f64,
    #[arg(long, default_value = "bang_bang")]
    pursuer: String,
    #[arg(long, default_value = "straight_up")]
    evader: String,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    /// Trajectory CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Simulate { scenario, out } => simulate(&scenario, out.as_deref()),
        Command::Verify(a) => verify(&a),
        Command::CriticalSpeed { scenario, tol } => critical(&scenario, tol),
        Command::TwoTarget(a) => two_target(&a),
        Command::Sweep { nu, out, scenario } => sweep(&nu, &out, scenario.as_deref()),
        Command::DivergenceSweep {
            nu,
            out,
            pursuer,
            evader,
            dt,
        } => divergence_sweep(&nu, &out, &pursuer, &evader, dt),
        Command::Arena {
            port,
            host,
            scenario,
            realtime_factor,
            hz,
            log_dir,
        } => arena(&host, port, &scenario, realtime_factor, hz, log_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).map_err(|e| anyhow!("{}:\n{e}", path.display()))
}

fn simulate(path: &Path, out: Option<&Path>) -> Outcome {
    let sc = load(path)?;
    if sc.pursuer.is_none() && sc.pursuers.len() > 1 {
        return simulate_team(&sc, out);
    }
    let p = sc.prepare().map_err(anyhow::Error::from)?;
    let (mut pursuer, mut evader) = (p.pursuer.clone(), p.evader.clone());
    let res = run(
        &p.config,
        p.pursuer_position,
        p.evader_position,
        &mut pursuer,
        &mut evader,
        p.targets.as_ref(),
    )
    .map_err(anyhow::Error::from)?;
    if let Some(out) = out {
        let f = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
        write_trajectory(&res.record, std::io::BufWriter::new(f))
            .with_context(|| format!("writing {}", out.display()))?;
    }
    println!("{}", outcome_line(&res.outcome).trim_start_matches("# "));
    println!("steps={} delta={}", res.steps, p.config.delta);
    if let Some(d) = res.delta1() {
        println!(
            "capture_excess={:.6e} d_min_final={:.6e} delta1={:.6e}",
            d.excess, d.d_min_final, d.delta1
        );
    }
    print!("{}", res.report);
    if let OutcomeKind::MonitorViolation { name } = res.outcome.kind {
        return Err(Failure::Check(format!("run stopped by {name}")));
    }
    if !res.report.all_pass() {
        let names: Vec<_> = res.report.failures().map(|m| m.name).collect();
        return Err(Failure::Check(format!("monitors failed: {}", names.join(", "))));
    }
    Ok(())
}

fn simulate_team(sc: &Scenario, out: Option<&Path>) -> Outcome {
    let (cfg, mut team, mut evader) = sc.prepare_team().map_err(anyhow::Error::from)?;
    let res = run_team(&cfg, &mut team, sc.evader.position, &mut evader, Some(&sc.targets))
        .map_err(anyhow::Error::from)?;
    if let Some(out) = out {
        let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
        w.write_record(["t", "xE", "yE"]).context("writing track")?;
        for (k, x) in res.evader_track.iter().enumerate() {
            let t = k as f64 * cfg.dt;
            w.serialize((t, x.x, x.y)).context("writing track")?;
        }
        w.flush().context("writing track")?;
    }
    println!("{}", outcome_line(&res.outcome).trim_start_matches("# "));
    if let Some(i) = res.captured_by {
        println!("captured_by={i}");
    }
    let mut failed = Vec::new();
    for (i, rep) in res.reports.iter().enumerate() {
        println!("[pursuer {i}]");
        print!("{rep}");
        failed.extend(rep.failures().map(|m| format!("{i}:{}", m.name)));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("monitors failed: {}", failed.join(", "))))
    }
}

fn parse_floats(text: &str, n: usize, what: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| f64::from_str(s.trim()))
        .collect::<Result<_, _>>()
        .with_context(|| format!("{what}: expected {n} numbers separated by ':'"))?;
    if parts.len() != n {
        bail!("{what}: expected {n} numbers separated by ':', got '{text}'");
    }
    Ok(parts)
}

fn verify(a: &VerifyArgs) -> Outcome {
    let range = parse_floats(&a.nu_range, 2, "--nu-range")?;
    if !(0.0 <= range[0] && range[0] < range[1] && range[1] < 1.0) {
        return Err(anyhow!("--nu-range must satisfy 0 <= lo < hi < 1").into());
    }
    let cfg = SuiteConfig {
        runs: a.runs,
        seed: a.seed,
        nu_range: (range[0], range[1]),
        dt: a.dt,
        ..SuiteConfig::default()
    };
    let rep = run_suite(&cfg).map_err(anyhow::Error::from)?;
    let n = rep.runs.len();
    println!("scenarios={} runs={n} captured={}", a.runs, rep.captured());
    for (name, passed) in rep.monitor_pass_counts() {
        println!("{name} {passed}/{n}");
    }
    let failures: Vec<_> = rep.failures().collect();
    for f in failures.iter().take(20) {
        println!(
            "failed scenario={} evader={} nu={:.4} outcome={}",
            f.scenario, f.evader, f.nu, f.outcome
        );
        for m in f.report.failures() {
            println!("  {m}");
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} of {n} runs failed", failures.len())))
    }
}

fn critical(path: &Path, tol: f64) -> Outcome {
    let sc = load(path)?;
    let pursuer = sc
        .pursuer
        .as_ref()
        .or(sc.pursuers.first())
        .ok_or_else(|| anyhow!("scenario has no pursuer"))?;
    match critical_speed(pursuer.position, sc.evader.position, &sc.targets, tol)
        .map_err(anyhow::Error::from)?
    {
        CriticalSpeed::Found(nu) => println!("{nu:.6}"),
        CriticalSpeed::Unreachable { lower_bound } => {
            println!("unreachable (disc misses the targets up to nu = {lower_bound:.6})")
        }
    }
    Ok(())
}

fn lab_kinds(pursuer: &str, evader: &str) -> anyhow::Result<(LabPursuer, LabEvader)> {
    Ok((pursuer.parse()?, evader.parse()?))
}

fn two_target(a: &TwoTargetArgs) -> Outcome {
    let (pk, ek) = lab_kinds(&a.pursuer, &a.evader)?;
    let mut sc = TwoTargetScenario::preset(a.nu).map_err(anyhow::Error::from)?;
    sc.dt = a.dt;
    let rep = run_experiment(&sc, pk, ek).map_err(anyhow::Error::from)?;
    println!("{rep}");
    println!("evader_won={}", evader_won(&rep));
    if let Some(out) = &a.out {
        let f = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
        write_trajectory(&rep.run.record, std::io::BufWriter::new(f))
            .with_context(|| format!("writing {}", out.display()))?;
    }
    if pk == LabPursuer::Guaranteed && !rep.run.report.all_pass() {
        return Err(Failure::Check("guaranteed pursuer failed a monitor".into()));
    }
    Ok(())
}

fn nu_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let v = parse_floats(spec, 3, "--nu")?;
    let (lo, hi, step) = (v[0], v[1], v[2]);
    if !(step > 0.0 && lo <= hi && lo > 0.0 && hi < 1.0) {
        bail!("--nu must be start:stop:step with 0 < start <= stop < 1 and step > 0");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    // Rounded so grid points print as typed (0.3, not 0.30000000000000004).
    Ok((0..count)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

const DEFAULT_SWEEP: &str = r#"
nu = 0.5
delta = 0.1
t_max = 1000.0

[pursuer]
position = [0.0, 0.0]
strategy = { kind = "guaranteed" }

[evader]
position = [0.0, 1.0]
strategy = { kind = "worst_case" }
"#;

fn sweep(nu: &str, out: &Path, scenario: Option<&Path>) -> Outcome {
    let nus = nu_grid(nu)?;
    let (base, auto_delta) = match scenario {
        Some(p) => (load(p)?, false),
        None => (parse_scenario(DEFAULT_SWEEP).map_err(|e| anyhow!("{e}"))?, true),
    };
    let rows: Vec<_> = nus
        .par_iter()
        .map(|&v| -> anyhow::Result<_> {
            let mut sc = base.clone();
            sc.nu = v;
            if auto_delta {
                let nu = pursuit_core::SpeedRatio::new(v)?;
                let ac = pursuit_core::geometry::apollonius_disc(
                    sc.pursuer.as_ref().map(|p| p.position).unwrap_or_default(),
                    sc.evader.position,
                    nu,
                );
                sc.delta = pursuit_core::scenario::DeltaSpec::Value(0.1 * ac.radius);
            }
            let p = sc.prepare()?;
            let (mut pursuer, mut evader) = (p.pursuer.clone(), p.evader.clone());
            let mut cfg = p.config.clone();
            cfg.record = false;
            let res = run(
                &cfg,
                p.pursuer_position,
                p.evader_position,
                &mut pursuer,
                &mut evader,
                p.targets.as_ref(),
            )?;
            let bound = pursuit_core::geometry::capture_time_bound(
                cfg.nu,
                res.initial.cap().radius,
                cfg.delta,
            );
            Ok((v, cfg.delta, bound, res))
        })
        .collect::<anyhow::Result<_>>()?;

    let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
    w.write_record([
        "nu", "delta", "outcome", "t_f", "time_bound", "capture_excess", "d_min_final", "delta1",
        "monitors_pass",
    ])
    .context("writing sweep")?;
    let mut failed = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for (v, delta, bound, res) in &rows {
        let t_f = res.outcome.terminal().map(|(t, _)| t);
        let d1 = res.delta1();
        let pass = res.report.all_pass() && res.outcome.is_captured();
        if !pass {
            failed.push(format!("{v:.4}"));
        }
        w.serialize((
            v,
            delta,
            res.outcome.label(),
            t_f,
            bound,
            d1.map(|d| d.excess),
            d1.map(|d| d.d_min_final),
            d1.map(|d| d.delta1),
            pass,
        ))
        .context("writing sweep")?;
        writeln!(
            stdout,
            "nu={v:.4} {} t_f={} bound={bound:.4}",
            res.outcome.label(),
            t_f.map_or("-".into(), |t| format!("{t:.4}"))
        )
        .ok();
    }
    w.flush().context("writing sweep")?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed at nu = {}", failed.join(", "))))
    }
}

fn divergence_sweep(nu: &str, out: &Path, pursuer: &str, evader: &str, dt: f64) -> Outcome {
    let nus = nu_grid(nu)?;
    let (pk, ek) = lab_kinds(pursuer, evader)?;
    let rows: Vec<_> = nus
        .par_iter()
        .map(|&v| {
            let mut sc = TwoTargetScenario::preset(v)?;
            sc.dt = dt;
            let rep = run_experiment(&sc, pk, ek)?;
            Ok((v, rep))
        })
        .collect::<pursuit_core::Result<_>>()
        .map_err(anyhow::Error::from)?;

    let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
    w.write_record(["nu", "predicted_rate", "fitted_rate", "flips", "outcome", "evader_won"])
        .context("writing sweep")?;
    let mut stdout = std::io::stdout().lock();
    for (v, rep) in &rows {
        let predicted = predicted_divergence_rate(*v).map_err(anyhow::Error::from)?;
        w.serialize((v, predicted, rep.fitted_rate, rep.flip_count, rep.run.outcome.label(), evader_won(rep)))
            .context("writing sweep")?;
        writeln!(
            stdout,
            "nu={v:.4} predicted={predicted:+.5} fitted={:+.5} {}",
            rep.fitted_rate,
            rep.run.outcome.label()
        )
        .ok();
    }
    w.flush().context("writing sweep")?;
    Ok(())
}

fn arena(host: &str, port: u16, path: &Path, rtf: f64, hz: f64, log_dir: Option<PathBuf>) -> Outcome {
    if !(rtf > 0.0 && rtf.is_finite() && hz > 0.0 && hz.is_finite()) {
        return Err(anyhow!("--realtime-factor and --hz must be positive").into());
    }
    let sc = load(path)?;
    // Fail fast on scenarios a session cannot start from.
    pursuit_arena::Session::new(sc.clone(), Default::default()).map_err(anyhow::Error::from)?;
    let mut cfg = pursuit_arena::ArenaConfig::new(sc);
    cfg.pacing = pursuit_arena::Pacing {
        broadcast_hz: hz,
        realtime_factor: rtf,
    };
    if let Some(dir) = &log_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    cfg.log_dir = log_dir;
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))?;
        println!("arena listening on ws://{}/arena", listener.local_addr()?);
        pursuit_arena::serve(listener, cfg).await.context("serving")
    })
    .map_err(|e| Failure::Check(format!("{e:#}")))
}
