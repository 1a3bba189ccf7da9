//! TOML configuration.
//!
//! Every section and field is optional; omitted values take the defaults
//! shown below.
//!
//! ```toml
//! [run]
//! n_bits = 40
//! n_initial = 25
//! cycles = 1000
//! seed = 0
//! maximize = false
//!
//! [run.train]
//! learning_rate = 0.001
//! epochs = 300
//! init_scale = 0.3
//! regularization = 1e-6
//! batch_size = 1
//! latent = 4
//! warm_start = false
//!
//! [run.anneal]
//! num_reads = 50
//! sweeps = 1000
//! beta_min = 0.1
//! beta_max = 10.0
//! normalize = true
//!
//! [window]
//! superstrate = "PDMS"        # or "Air", "SiO2"
//! grid = { start_nm = 300.0, step_nm = 5.0, count = 441 }
//! ideal = { visible_min_nm = 400.0, visible_max_nm = 700.0 }
//!
//! [data]
//! materials = "default"       # "builtin", "constant", or a directory
//! # solar = "path/to/solar.csv"
//!
//! [analysis]
//! method = "averaged"         # poly-<d>, pw-<p>, averaged
//! threshold = -3.0
//! cycle_scale = 1000.0
//!
//! [output]
//! dir = "out"
//!
//! [sweep]                     # only read by `trcopt sweep`
//! sizes = [40, 60]
//! counts = [25, 100]
//! seeds = 3
//! root_seed = 0
//! workers = 0                 # 0 = one per CPU
//! thresholds = { 160 = -2.0 } # per-size override of analysis.threshold
//! ```
//!
//! The `seed` fields of `run.train` and `run.anneal` are ignored: per-cycle
//! seeds are derived from `run.seed`. Relative paths are resolved against the
//! directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trcopt_core::convergence::{Method, DEFAULT_CYCLE_SCALE, DEFAULT_THRESHOLD};
use trcopt_core::window::WindowConfig;
use trcopt_core::RunConfig;

use crate::data::MaterialSource;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunConfig,
    pub window: WindowConfig,
    pub data: DataConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub materials: String,
    pub solar: Option<PathBuf>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { materials: "default".into(), solar: None }
    }
}

impl DataConfig {
    pub fn material_source(&self) -> MaterialSource {
        self.materials.parse().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub method: String,
    pub threshold: f64,
    /// Cycles per unit of the fitted time axis; gradients are per this many cycles.
    pub cycle_scale: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            method: "averaged".into(),
            threshold: DEFAULT_THRESHOLD,
            cycle_scale: DEFAULT_CYCLE_SCALE,
        }
    }
}

impl AnalysisConfig {
    pub fn method(&self) -> Result<Method> {
        self.method
            .parse()
            .map_err(|e: trcopt_core::Error| Error::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub counts: Vec<usize>,
    /// Seeds per cell; cell seeds are `root_seed, root_seed + 1, ...`.
    pub seeds: usize,
    pub root_seed: u64,
    pub workers: usize,
    pub thresholds: BTreeMap<String, f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![40, 60],
            counts: vec![25, 100],
            seeds: 3,
            root_seed: 0,
            workers: 0,
            thresholds: BTreeMap::new(),
        }
    }
}

impl SweepConfig {
    pub fn threshold_for(&self, n_bits: usize, default: f64) -> f64 {
        self.thresholds.get(&n_bits.to_string()).copied().unwrap_or(default)
    }
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| Error::Config {
            path: path.into(),
            message: e.to_string(),
        })?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let MaterialSource::Dir(dir) = self.data.material_source() {
            if dir.is_relative() {
                self.data.materials = base.join(dir).to_string_lossy().into_owned();
            }
        }
        if let Some(solar) = &self.data.solar {
            if solar.is_relative() {
                self.data.solar = Some(base.join(solar));
            }
        }
        if self.output.dir.is_relative() {
            self.output.dir = base.join(&self.output.dir);
        }
    }

    /// Checks everything a single run needs, labelling errors with `path`.
    pub fn validate(&self, path: &Path) -> Result<()> {
        let wrap = |e: trcopt_core::Error| Error::Config { path: path.into(), message: e.to_string() };
        self.run.validate().map_err(wrap)?;
        self.window.validate().map_err(wrap)?;
        self.analysis.method()?;
        if !(self.analysis.cycle_scale > 0.0 && self.analysis.cycle_scale.is_finite()) {
            return Err(Error::Config { path: path.into(), message: "analysis.cycle_scale must be positive".into() });
        }
        if !self.analysis.threshold.is_finite() {
            return Err(Error::Config { path: path.into(), message: "analysis.threshold must be finite".into() });
        }
        Ok(())
    }

    pub fn validate_sweep(&self, path: &Path) -> Result<()> {
        let bad = |message: String| Error::Config { path: path.into(), message };
        let s = &self.sweep;
        if s.sizes.is_empty() || s.counts.is_empty() || s.seeds == 0 {
            return Err(bad("sweep.sizes, sweep.counts and sweep.seeds must be non-empty".into()));
        }
        for key in s.thresholds.keys() {
            if !key.parse::<usize>().map(|n| s.sizes.contains(&n)).unwrap_or(false) {
                return Err(bad(format!("sweep.thresholds key {key:?} is not one of sweep.sizes")));
            }
        }
        for &n in &s.sizes {
            for &n0 in &s.counts {
                let run = RunConfig { n_bits: n, n_initial: n0, ..self.run.clone() };
                run.validate().map_err(|e| bad(format!("cell n_bits={n} n_initial={n0}: {e}")))?;
            }
        }
        self.validate(path)
    }
}
