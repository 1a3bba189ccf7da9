//! The active-learning loop: train a surrogate on every evaluated design,
//! anneal its QUBO, evaluate the best unseen proposal, repeat.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anneal::{anneal, AnnealConfig};
use crate::dataset::{Dataset, Sample};
use crate::encoding::BitVector;
use crate::error::{Error, Result};
use crate::fm::{fm_train, fm_train_from, FmModel, TrainConfig};
use crate::qubo::Qubo;
use crate::seed;

/// Scores a design. Lower is better unless the run maximizes.
pub trait Evaluator {
    fn evaluate(&self, x: &BitVector) -> Result<f64>;
}

impl<F> Evaluator for F
where
    F: Fn(&BitVector) -> Result<f64>,
{
    fn evaluate(&self, x: &BitVector) -> Result<f64> {
        self(x)
    }
}

/// Uses a fixed QUBO's energy as the objective (planted benchmark).
#[derive(Debug, Clone)]
pub struct QuboEvaluator(pub Qubo);

impl Evaluator for QuboEvaluator {
    fn evaluate(&self, x: &BitVector) -> Result<f64> {
        self.0.energy(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_bits: usize,
    pub n_initial: usize,
    pub cycles: usize,
    pub seed: u64,
    /// Negate FOMs before training so the annealer searches for large values.
    pub maximize: bool,
    pub train: TrainConfig,
    pub anneal: AnnealConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_bits: 40,
            n_initial: 25,
            cycles: 1000,
            seed: 0,
            maximize: false,
            train: TrainConfig::default(),
            anneal: AnnealConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bits == 0 {
            return Err(Error::Config("n_bits must be at least 1".into()));
        }
        if self.n_initial == 0 {
            return Err(Error::Config("n_initial must be at least 1".into()));
        }
        if self.cycles == 0 {
            return Err(Error::Config("cycles must be at least 1".into()));
        }
        if let Some(space) = state_count(self.n_bits) {
            if (self.n_initial as u128) > space {
                return Err(Error::Config(format!(
                    "cannot draw {} distinct designs from {} states",
                    self.n_initial, space
                )));
            }
        }
        self.train.validate()?;
        self.anneal.validate()
    }
}

fn state_count(n: usize) -> Option<u128> {
    (n < 128).then(|| 1u128 << n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    /// 1-based cycle index.
    pub cycle: usize,
    pub x: BitVector,
    pub fom: f64,
}

/// The design evaluated in each cycle, in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cycles(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.cycle as f64).collect()
    }

    pub fn foms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.fom).collect()
    }

    /// Running minimum of the per-cycle FOMs, seeded with `start`.
    pub fn running_min(&self, start: f64) -> Vec<f64> {
        let mut best = start;
        self.points
            .iter()
            .map(|p| {
                best = best.min(p.fom);
                best
            })
            .collect()
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> BitVector {
    let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    BitVector::from_bools(&bits)
}

fn draw_distinct(rng: &mut ChaCha8Rng, n: usize, count: usize, known: &Dataset) -> Result<Vec<BitVector>> {
    let space = state_count(n);
    let available = space.map(|s| s - known.len() as u128);
    if let Some(a) = available {
        if (count as u128) > a {
            return Err(Error::Config(format!(
                "only {a} unseen designs remain, cannot draw {count}"
            )));
        }
    }
    let mut out: Vec<BitVector> = Vec::with_capacity(count);
    let mut seen = hashbrown::HashSet::new();
    // enumerate small spaces instead of rejection sampling once they fill up
    if let (Some(s), Some(a)) = (space, available) {
        if s <= 1 << 20 && (count as u128) * 2 > a {
            let mut pool: Vec<BitVector> = (0..s as u64)
                .map(|i| BitVector::from_index(i, n))
                .filter(|x| !known.contains(x))
                .collect();
            for i in 0..count {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            pool.truncate(count);
            return Ok(pool);
        }
    }
    while out.len() < count {
        let x = random_vector(rng, n);
        if !known.contains(&x) && seen.insert(x.clone()) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Evaluates `n_initial` distinct uniform-random designs.
pub fn seed_dataset(cfg: &RunConfig, evaluator: &dyn Evaluator) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, seed::SEEDING));
    let mut data = Dataset::new();
    for x in draw_distinct(&mut rng, cfg.n_bits, cfg.n_initial, &data)? {
        let fom = evaluator.evaluate(&x)?;
        data.push(Sample { x, fom })?;
    }
    Ok(data)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub initial: usize,
    pub dataset: Dataset,
    pub trajectory: Trajectory,
    /// Surrogate trained in the final cycle.
    pub model: FmModel,
}

impl RunOutput {
    /// Lowest FOM among the initial random designs.
    pub fn initial_best(&self) -> f64 {
        self.dataset.samples()[..self.initial]
            .iter()
            .map(|s| s.fom)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn run(cfg: &RunConfig, evaluator: &dyn Evaluator) -> Result<RunOutput> {
    run_with(cfg, evaluator, |_| {})
}

/// [`run`] with a callback after every cycle.
pub fn run_with(
    cfg: &RunConfig,
    evaluator: &dyn Evaluator,
    mut on_cycle: impl FnMut(&TrajectoryPoint),
) -> Result<RunOutput> {
    let mut dataset = seed_dataset(cfg, evaluator)?;
    let sign = if cfg.maximize { -1.0 } else { 1.0 };
    let mut training: Vec<Sample> = dataset
        .samples()
        .iter()
        .map(|s| Sample { x: s.x.clone(), fom: sign * s.fom })
        .collect();
    let mut trajectory = Trajectory::default();
    let mut previous: Option<FmModel> = None;
    let mut last = FmModel::zeros(cfg.n_bits, cfg.train.latent);
    let train_root = seed::derive(cfg.seed, seed::TRAIN);
    let anneal_root = seed::derive(cfg.seed, seed::ANNEAL);
    let fallback_root = seed::derive(cfg.seed, seed::FALLBACK);

    for cycle in 1..=cfg.cycles {
        let at = |e: Error| Error::Cycle { cycle, source: Box::new(e) };
        let train_cfg = TrainConfig { seed: seed::derive(train_root, cycle as u64), ..cfg.train.clone() };
        let model = match previous.take() {
            Some(prev) if cfg.train.warm_start => fm_train_from(prev, &training, &train_cfg),
            _ => fm_train(&training, cfg.n_bits, &train_cfg),
        }
        .map_err(at)?;
        let anneal_cfg = AnnealConfig { seed: seed::derive(anneal_root, cycle as u64), ..cfg.anneal.clone() };
        let proposals = anneal(&model.to_qubo(), &anneal_cfg).map_err(at)?;
        let x = match proposals.into_iter().find(|s| !dataset.contains(&s.x)) {
            Some(s) => s.x,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(fallback_root, cycle as u64));
                draw_distinct(&mut rng, cfg.n_bits, 1, &dataset).map_err(at)?.remove(0)
            }
        };
        let fom = evaluator.evaluate(&x).map_err(at)?;
        dataset.push(Sample { x: x.clone(), fom }).map_err(at)?;
        training.push(Sample { x: x.clone(), fom: sign * fom });
        let point = TrajectoryPoint { cycle, x, fom };
        on_cycle(&point);
        trajectory.points.push(point);
        if cfg.train.warm_start {
            previous = Some(model.clone());
        }
        last = model;
    }
    Ok(RunOutput { initial: cfg.n_initial, dataset, trajectory, model: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast(n_bits: usize, n_initial: usize, cycles: usize) -> RunConfig {
        RunConfig {
            n_bits,
            n_initial,
            cycles,
            seed: 5,
            train: TrainConfig { epochs: 30, ..Default::default() },
            anneal: AnnealConfig { num_reads: 5, sweeps: 50, ..Default::default() },
            ..Default::default()
        }
    }

    fn ones_count(x: &BitVector) -> Result<f64> {
        Ok(x.ones_iter().count() as f64)
    }

    #[test]
    fn seed_counts() {
        let d = seed_dataset(&fast(40, 25, 1), &ones_count).unwrap();
        assert_eq!(d.len(), 25);
        let d = seed_dataset(&fast(40, 1, 1), &ones_count).unwrap();
        assert_eq!(d.len(), 1);
        assert!(matches!(seed_dataset(&fast(2, 5, 1), &ones_count), Err(Error::Config(_))));
        let d = seed_dataset(&fast(2, 4, 1), &ones_count).unwrap();
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn zero_cycles_rejected() {
        assert!(matches!(run(&fast(8, 4, 0), &ones_count), Err(Error::Config(_))));
    }

    #[test]
    fn single_cycle() {
        let out = run(&fast(10, 5, 1), &ones_count).unwrap();
        assert_eq!(out.trajectory.len(), 1);
        assert_eq!(out.trajectory.points[0].cycle, 1);
        assert_eq!(out.dataset.len(), 6);
    }

    #[test]
    fn exhausts_small_space_via_fallback() {
        // 3 bits: 8 states, 2 seeds + 6 cycles fills the space exactly
        let out = run(&fast(3, 2, 6), &ones_count).unwrap();
        assert_eq!(out.dataset.len(), 8);
        assert!(matches!(run(&fast(3, 2, 7), &ones_count), Err(Error::Cycle { cycle: 7, .. })));
    }

    #[test]
    fn evaluator_error_carries_cycle() {
        let failing = |x: &BitVector| {
            if x.ones_iter().count() == 0 {
                Err(Error::Data("boom".into()))
            } else {
                Ok(1.0)
            }
        };
        let cfg = RunConfig { n_bits: 4, n_initial: 2, cycles: 14, ..fast(4, 2, 14) };
        // all 16 states get visited (or the seed hits 0000), so the failure must surface
        match run(&cfg, &failing) {
            Err(Error::Cycle { .. }) | Err(Error::Data(_)) => {}
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn maximize_prefers_large_values() {
        let mut cfg = fast(12, 10, 20);
        cfg.maximize = true;
        let out = run(&cfg, &ones_count).unwrap();
        let best = out.dataset.samples().iter().map(|s| s.fom).fold(0.0, f64::max);
        assert_eq!(best, 12.0);
    }
}
