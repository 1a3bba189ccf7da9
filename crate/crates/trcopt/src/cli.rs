//! The `trcopt` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use trcopt_core::convergence::{format_cycle, Method};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formats;
use crate::pipeline::{build_evaluator, execute_run, execute_sweep, write_file, Analysis};

#[derive(Debug, Parser)]
#[command(name = "trcopt", version, about = "Active-learning design of transparent radiative-cooling windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one active-learning optimization.
    Run(RunArgs),
    /// Run every (size, initial count, seed) cell of a sweep.
    Sweep(SweepArgs),
    /// Fit a stored trajectory and locate its initiation point.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Regression method: poly-<d>, pw-<p>, averaged, or poly / pw with --degree / --pieces.
    #[arg(long)]
    pub method: Option<String>,
    /// Polynomial degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Number of piecewise-linear segments.
    #[arg(long)]
    pub pieces: Option<usize>,
    /// Gradient threshold in FOM per `analysis.cycle_scale` cycles.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Root seed (overrides `run.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parallel runs; 0 uses one per CPU (overrides `sweep.workers`).
    #[arg(long)]
    pub workers: Option<usize>,
    /// First cell seed (overrides `sweep.root_seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trajectory CSV (`cycle,bitstring,fom`).
    pub trajectory: PathBuf,
    /// Config supplying `[analysis]` defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for curve.csv and report.csv; defaults to `analysis-<method>`
    /// next to the trajectory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub method: MethodArgs,
}

/// Combines `--method`, `--degree` and `--pieces` into a method, if any were given.
pub fn resolve_method(args: &MethodArgs) -> Result<Option<Method>> {
    let usage = |m: String| Err(Error::Usage(m));
    let method = match (args.method.as_deref(), args.degree, args.pieces) {
        (None, None, None) => return Ok(None),
        (_, Some(_), Some(_)) => return usage("--degree and --pieces are mutually exclusive".into()),
        (None | Some("poly"), Some(d), None) => Method::Polynomial(d),
        (None | Some("pw"), None, Some(p)) => Method::Piecewise(p),
        (Some("poly"), None, None) => Method::Polynomial(3),
        (Some("pw"), None, None) => Method::Piecewise(5),
        (Some(name), degree, pieces) => {
            let m: Method = name.parse().map_err(|e: trcopt_core::Error| Error::Usage(e.to_string()))?;
            let conflict = match m {
                Method::Polynomial(d) => degree.is_some_and(|x| x != d) || pieces.is_some(),
                Method::Piecewise(p) => pieces.is_some_and(|x| x != p) || degree.is_some(),
                Method::Averaged => degree.is_some() || pieces.is_some(),
            };
            if conflict {
                return usage(format!("--method {name} conflicts with --degree/--pieces"));
            }
            m
        }
    };
    match method {
        Method::Polynomial(0) => usage("polynomial degree must be at least 1".into()),
        Method::Piecewise(0) => usage("piecewise fits need at least 1 piece".into()),
        m => Ok(Some(m)),
    }
}

fn load_config(path: Option<&Path>) -> Result<(Config, PathBuf)> {
    match path {
        Some(p) => Ok((Config::load(p)?, p.to_path_buf())),
        None => Ok((Config::default(), PathBuf::from("<defaults>"))),
    }
}

fn apply_method(cfg: &mut Config, args: &MethodArgs) -> Result<()> {
    if let Some(m) = resolve_method(args)? {
        cfg.analysis.method = m.to_string();
    }
    if let Some(t) = args.threshold {
        cfg.analysis.threshold = t;
        cfg.sweep.thresholds.clear();
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let (mut cfg, path) = load_config(args.config.as_deref())?;
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    apply_method(&mut cfg, &args.method)?;
    cfg.validate(&path)?;
    let evaluator = build_evaluator(&cfg)?;
    let summary = execute_run(&cfg.run, &evaluator, &Analysis::from_config(&cfg)?, &cfg.output.dir)?;
    println!(
        "best fom {:.6} ({}), initiation cycle {}, written to {}",
        summary.best.fom,
        summary.best.x,
        format_cycle(summary.report.initiation_cycle),
        summary.dir.display()
    );
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let (mut cfg, path) = load_config(args.config.as_deref())?;
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(w) = args.workers {
        cfg.sweep.workers = w;
    }
    if let Some(seed) = args.seed {
        cfg.sweep.root_seed = seed;
    }
    apply_method(&mut cfg, &args.method)?;
    cfg.validate_sweep(&path)?;
    let evaluator = build_evaluator(&cfg)?;
    let outcome = execute_sweep(&cfg, &evaluator)?;
    let total = outcome.runs.len() + outcome.failures.len();
    println!("{} of {total} runs succeeded, summary in {}", outcome.runs.len(), cfg.output.dir.join("summary.csv").display());
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(Error::SweepFailed { failed: outcome.failures.len(), total })
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let (mut cfg, path) = load_config(args.config.as_deref())?;
    apply_method(&mut cfg, &args.method)?;
    cfg.validate(&path)?;
    let analysis = Analysis::from_config(&cfg)?;
    let file = std::fs::File::open(&args.trajectory).map_err(|e| Error::io(&args.trajectory, e))?;
    let trajectory = formats::read_trajectory(std::io::BufReader::new(file), &args.trajectory)?;
    let (curve, report) = analysis.apply(&trajectory)?;
    let out = match &args.out {
        Some(o) => o.clone(),
        None => args
            .trajectory
            .parent()
            .unwrap_or(Path::new("."))
            .join(format!("analysis-{}", analysis.method)),
    };
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    write_file(&out.join("curve.csv"), |w, p| formats::write_curve(w, &curve, p))?;
    write_file(&out.join("report.csv"), |w, p| formats::write_report(w, &report, p))?;
    info!("wrote {}", out.display());
    println!("{} threshold {}: initiation cycle {}", report.method, report.threshold, format_cycle(report.initiation_cycle));
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Analyze(a) => cmd_analyze(a),
    }
}

/// Process exit code for an error: 2 for usage errors, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => 2,
        _ => 1,
    }
}
