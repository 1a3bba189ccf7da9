//! Simulated annealing over QUBO problems.
//!
//! Each read is an independent single-spin-flip Metropolis chain started from
//! a uniform random state and swept over a geometric inverse-temperature
//! schedule. Local fields are cached so a proposal costs O(1) and an accepted
//! flip O(n).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::BitVector;
use crate::error::{Error, Result};
use crate::qubo::Qubo;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub num_reads: usize,
    pub sweeps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub seed: u64,
    /// Measure inverse temperatures in units of `1 / max|Q_ij|`, so the
    /// schedule is independent of the overall coefficient scale.
    pub normalize: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            num_reads: 50,
            sweeps: 1000,
            beta_min: 0.1,
            beta_max: 10.0,
            seed: 0,
            normalize: true,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 || self.sweeps == 0 {
            return Err(Error::Config("num_reads and sweeps must be at least 1".into()));
        }
        if !(self.beta_min > 0.0 && self.beta_min < self.beta_max && self.beta_max.is_finite()) {
            return Err(Error::Config(format!(
                "beta schedule needs 0 < beta_min < beta_max, got ({}, {})",
                self.beta_min, self.beta_max
            )));
        }
        Ok(())
    }
}

/// A returned state with its energy (offset excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: BitVector,
    pub energy: f64,
}

/// `beta_min * (beta_max / beta_min)^(s / (sweeps - 1))` for each sweep `s`.
pub fn geometric_schedule(beta_min: f64, beta_max: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![beta_max];
    }
    let ratio = libm::log(beta_max / beta_min);
    (0..sweeps)
        .map(|s| beta_min * libm::exp(ratio * s as f64 / (sweeps - 1) as f64))
        .collect()
}

struct Couplings {
    n: usize,
    linear: Vec<f64>,
    // symmetric, zero diagonal
    pair: Vec<f64>,
}

impl Couplings {
    fn new(q: &Qubo) -> Self {
        let n = q.n();
        let mut linear = vec![0.0; n];
        let mut pair = vec![0.0; n * n];
        for (i, j, v) in q.entries() {
            if i == j {
                linear[i] = v;
            } else {
                pair[i * n + j] = v;
                pair[j * n + i] = v;
            }
        }
        Self { n, linear, pair }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.pair[i * self.n..(i + 1) * self.n]
    }
}

fn run_read(c: &Couplings, schedule: &[f64], rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = c.n;
    let mut x: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
    let mut field = c.linear.clone();
    let mut energy = 0.0;
    for i in 0..n {
        if x[i] == 1 {
            energy += c.linear[i];
            for (j, f) in field.iter_mut().enumerate() {
                *f += c.pair[i * n + j];
            }
        }
    }
    for i in 0..n {
        if x[i] == 1 {
            for j in (i + 1)..n {
                if x[j] == 1 {
                    energy += c.pair[i * n + j];
                }
            }
        }
    }
    let mut best = x.clone();
    let mut best_energy = energy;

    for &beta in schedule {
        for i in 0..n {
            let delta = if x[i] == 0 { field[i] } else { -field[i] };
            let accept = delta <= 0.0 || rng.random::<f64>() < libm::exp(-beta * delta);
            if !accept {
                continue;
            }
            let step = if x[i] == 0 { 1.0 } else { -1.0 };
            x[i] ^= 1;
            energy += delta;
            for (f, &p) in field.iter_mut().zip(c.row(i)) {
                *f += step * p;
            }
            if energy < best_energy {
                best_energy = energy;
                best.copy_from_slice(&x);
            }
        }
    }
    best
}

/// Runs `num_reads` chains and returns the distinct best-visited states,
/// sorted by energy ascending (ties by bit string). Energies are recomputed
/// with [`Qubo::energy`].
pub fn anneal(q: &Qubo, cfg: &AnnealConfig) -> Result<Vec<Solution>> {
    cfg.validate()?;
    if q.n() == 0 {
        return Err(Error::Config("qubo must have at least one variable".into()));
    }
    if !q.is_finite() {
        return Err(Error::Config("qubo has non-finite coefficients".into()));
    }
    let couplings = Couplings::new(q);
    let scale = if cfg.normalize {
        let m = q.max_abs_coefficient();
        if m > 0.0 { 1.0 / m } else { 1.0 }
    } else {
        1.0
    };
    let schedule: Vec<f64> = geometric_schedule(cfg.beta_min, cfg.beta_max, cfg.sweeps)
        .into_iter()
        .map(|b| b * scale)
        .collect();

    let mut found: BTreeMap<BitVector, f64> = BTreeMap::new();
    for read in 0..cfg.num_reads {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, read as u64));
        let bits = BitVector::from_bits(&run_read(&couplings, &schedule, &mut rng))?;
        if !found.contains_key(&bits) {
            let e = q.energy(&bits)?;
            found.insert(bits, e);
        }
    }
    let mut out: Vec<Solution> = found
        .into_iter()
        .map(|(x, energy)| Solution { x, energy })
        .collect();
    // BTreeMap iteration is already bit-string ordered, so a stable sort keeps ties lexicographic
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}
