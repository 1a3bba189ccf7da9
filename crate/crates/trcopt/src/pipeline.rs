//! Single runs and size x initial-data sweeps, with their output files.
//!
//! Each run writes into `<out>/n<bits>_N<initial>_seed<seed>/`:
//!
//! - `trajectory.csv`, `dataset.csv`
//! - `curve.csv`, `report.csv` (convergence analysis)
//! - `best.csv`, `spectrum.csv` (lowest-FOM design and its transmittance)
//! - `model.txt`, `qubo.txt` (surrogate from the final cycle)
//!
//! A sweep adds `summary.csv` (one row per run), `median.csv` (one row per
//! cell) and `failures.csv` to `<out>`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{error, info};
use rayon::prelude::*;
use trcopt_core::active::run_with;
use trcopt_core::convergence::{analyze, format_cycle, ConvergenceReport, Method, Series};
use trcopt_core::window::WindowEvaluator;
use trcopt_core::{RunConfig, Sample, Trajectory};

use crate::config::Config;
use crate::data::{load_materials, load_solar};
use crate::error::{Error, Result};
use crate::{formats, model_io};

pub fn build_evaluator(cfg: &Config) -> Result<WindowEvaluator> {
    let materials = load_materials(&cfg.data.material_source())?;
    let solar = load_solar(cfg.data.solar.as_deref(), cfg.window.grid)?;
    Ok(WindowEvaluator::new(&materials, solar, &cfg.window)?)
}

pub fn run_dir_name(n_bits: usize, n_initial: usize, seed: u64) -> String {
    format!("n{n_bits}_N{n_initial}_seed{seed}")
}

/// How trajectories are analysed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub method: Method,
    pub threshold: f64,
    pub cycle_scale: f64,
}

impl Analysis {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        Ok(Self {
            method: cfg.analysis.method()?,
            threshold: cfg.analysis.threshold,
            cycle_scale: cfg.analysis.cycle_scale,
        })
    }

    pub fn apply(&self, trajectory: &Trajectory) -> Result<(trcopt_core::convergence::RegressionCurve, ConvergenceReport)> {
        let series = Series::try_from(trajectory)?.with_cycle_scale(self.cycle_scale);
        Ok(analyze(&series, self.method, self.threshold)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub n_bits: usize,
    pub n_initial: usize,
    pub seed: u64,
    pub dir: PathBuf,
    pub report: ConvergenceReport,
    pub best: Sample,
    pub initial_best: f64,
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>, &Path) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w, path)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs the active-learning loop and writes every per-run file under `out`.
pub fn execute_run(run: &RunConfig, evaluator: &WindowEvaluator, analysis: &Analysis, out: &Path) -> Result<RunSummary> {
    let dir = out.join(run_dir_name(run.n_bits, run.n_initial, run.seed));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let label = dir.file_name().unwrap().to_string_lossy().into_owned();
    let step = (run.cycles / 10).max(1);
    let output = run_with(run, evaluator, |p| {
        if p.cycle % step == 0 {
            info!("{label}: cycle {}/{} fom {:.6}", p.cycle, run.cycles, p.fom);
        }
    })?;
    let (curve, report) = analysis.apply(&output.trajectory)?;
    let best = output.dataset.best().expect("dataset is never empty").clone();
    let spectrum = evaluator.transmittance(&best.x)?;

    write_file(&dir.join("trajectory.csv"), |w, p| formats::write_trajectory(w, &output.trajectory, p))?;
    write_file(&dir.join("dataset.csv"), |w, p| formats::write_dataset(w, &output.dataset, p))?;
    write_file(&dir.join("curve.csv"), |w, p| formats::write_curve(w, &curve, p))?;
    write_file(&dir.join("report.csv"), |w, p| formats::write_report(w, &report, p))?;
    write_file(&dir.join("best.csv"), |w, p| formats::write_best(w, &best, p))?;
    write_file(&dir.join("spectrum.csv"), |w, p| formats::write_spectrum(w, &spectrum, p))?;
    write_file(&dir.join("model.txt"), |w, p| model_io::write_model(w, &output.model, p))?;
    write_file(&dir.join("qubo.txt"), |w, p| model_io::write_qubo(w, &output.model.to_qubo(), p))?;

    info!(
        "{label}: best fom {} (seed minimum {}), initiation cycle {}",
        best.fom,
        output.initial_best(),
        format_cycle(report.initiation_cycle)
    );
    Ok(RunSummary {
        n_bits: run.n_bits,
        n_initial: run.n_initial,
        seed: run.seed,
        dir,
        initial_best: output.initial_best(),
        report,
        best,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub n_bits: usize,
    pub n_initial: usize,
    pub seed: u64,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub runs: Vec<RunSummary>,
    pub failures: Vec<(Cell, Error)>,
}

/// Median initiation cycle with missing values ranked above every cycle.
/// An even count averages the middle pair; if either is missing so is the median.
pub fn median_initiation(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|c| c.unwrap_or(f64::INFINITY)).collect();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    let med = if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) };
    med.is_finite().then_some(med)
}

/// Median initiation per (n_bits, n_initial) cell in sweep order.
pub fn cell_medians(cfg: &Config, runs: &[RunSummary]) -> Vec<(usize, usize, usize, Option<f64>)> {
    let mut rows = Vec::new();
    for &n in &cfg.sweep.sizes {
        for &n0 in &cfg.sweep.counts {
            let values: Vec<Option<f64>> = runs
                .iter()
                .filter(|r| r.n_bits == n && r.n_initial == n0)
                .map(|r| r.report.initiation_cycle)
                .collect();
            rows.push((n, n0, values.len(), median_initiation(&values)));
        }
    }
    rows
}

/// Runs every sweep cell on up to `cfg.sweep.workers` threads.
///
/// Failing runs are collected rather than aborting the sweep. Output files do
/// not depend on the worker count.
pub fn execute_sweep(cfg: &Config, evaluator: &WindowEvaluator) -> Result<SweepOutcome> {
    let base = Analysis::from_config(cfg)?;
    let s = &cfg.sweep;
    let cells: Vec<Cell> = s
        .sizes
        .iter()
        .flat_map(|&n_bits| {
            s.counts.iter().flat_map(move |&n_initial| {
                (0..s.seeds as u64).map(move |i| Cell { n_bits, n_initial, seed: s.root_seed + i })
            })
        })
        .collect();
    let out = &cfg.output.dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {} workers: {e}", s.workers)))?;
    info!("sweep: {} runs on {} workers", cells.len(), pool.current_num_threads());

    let results: Vec<Result<RunSummary>> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                let run = RunConfig { n_bits: c.n_bits, n_initial: c.n_initial, seed: c.seed, ..cfg.run.clone() };
                let analysis = Analysis { threshold: s.threshold_for(c.n_bits, base.threshold), ..base };
                execute_run(&run, evaluator, &analysis, out)
            })
            .collect()
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (cell, r) in cells.into_iter().zip(results) {
        match r {
            Ok(summary) => runs.push(summary),
            Err(e) => {
                error!("{}: {e}", run_dir_name(cell.n_bits, cell.n_initial, cell.seed));
                failures.push((cell, e));
            }
        }
    }

    write_file(&out.join("summary.csv"), |w, p| {
        let mut text = String::from("n_bits,n_initial,seed,initiation_cycle\n");
        for r in &runs {
            text.push_str(&format!("{},{},{},{}\n", r.n_bits, r.n_initial, r.seed, format_cycle(r.report.initiation_cycle)));
        }
        w.write_all(text.as_bytes()).map_err(|e| Error::io(p, e))
    })?;
    write_file(&out.join("median.csv"), |w, p| {
        let mut text = String::from("n_bits,n_initial,runs,median_initiation_cycle\n");
        for (n, n0, count, med) in cell_medians(cfg, &runs) {
            text.push_str(&format!("{n},{n0},{count},{}\n", format_cycle(med)));
        }
        w.write_all(text.as_bytes()).map_err(|e| Error::io(p, e))
    })?;
    write_file(&out.join("failures.csv"), |w, p| {
        let mut text = String::from("n_bits,n_initial,seed,error\n");
        for (c, e) in &failures {
            let msg = e.to_string().replace(['"', '\n'], " ");
            text.push_str(&format!("{},{},{},\"{msg}\"\n", c.n_bits, c.n_initial, c.seed));
        }
        w.write_all(text.as_bytes()).map_err(|e| Error::io(p, e))
    })?;
    Ok(SweepOutcome { runs, failures })
}
