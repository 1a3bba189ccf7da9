//! Second-order factorization machine surrogate.
//!
//! `y(x) = w0 + sum_i w_i x_i + 1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2]`
//!
//! On binary inputs the model is exactly a QUBO plus constant, see [`FmModel::to_qubo`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::encoding::BitVector;
use crate::error::{Error, Result};
use crate::qubo::Qubo;

/// Latent size used throughout.
pub const DEFAULT_LATENT: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct FmModel {
    n: usize,
    k: usize,
    pub w0: f64,
    pub w: Vec<f64>,
    /// Latent factors, `n x k` row-major.
    pub v: Vec<f64>,
}

impl FmModel {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            w0: 0.0,
            w: vec![0.0; n],
            v: vec![0.0; n * k],
        }
    }

    pub fn from_parts(n: usize, k: usize, w0: f64, w: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if w.len() != n {
            return Err(Error::Dimension { expected: n, found: w.len() });
        }
        if v.len() != n * k {
            return Err(Error::Dimension { expected: n * k, found: v.len() });
        }
        let m = Self { n, k, w0, w, v };
        if !m.is_finite() {
            return Err(Error::Data("model parameters must be finite".into()));
        }
        Ok(m)
    }

    /// Zero bias and linear terms, latent factors drawn from `Normal(0, scale^2)`.
    pub fn random_init(n: usize, k: usize, scale: f64, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, scale)
            .map_err(|e| Error::Config(format!("latent init scale {scale}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Self::zeros(n, k);
        for v in m.v.iter_mut() {
            *v = normal.sample(&mut rng);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn latent_row(&self, i: usize) -> &[f64] {
        &self.v[i * self.k..(i + 1) * self.k]
    }

    pub fn is_finite(&self) -> bool {
        self.w0.is_finite()
            && self.w.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
    }

    fn check_len(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    /// Model output, term by term over every coordinate.
    pub fn predict(&self, x: &BitVector) -> Result<f64> {
        self.check_len(x)?;
        let xs: Vec<f64> = x.as_slice().iter().map(|&b| b as f64).collect();
        let mut y = self.w0;
        for (wi, xi) in self.w.iter().zip(&xs) {
            y += wi * xi;
        }
        let mut pair = 0.0;
        for f in 0..self.k {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for (i, xi) in xs.iter().enumerate() {
                let vif = self.v[i * self.k + f];
                sum += vif * xi;
                sum_sq += vif * vif * xi * xi;
            }
            pair += sum * sum - sum_sq;
        }
        Ok(y + 0.5 * pair)
    }

    /// Diagonal `w_i`, upper triangle `<v_i, v_j>`, offset `w0`.
    pub fn to_qubo(&self) -> Qubo {
        let mut q = Qubo::zeros(self.n);
        q.set_offset(self.w0);
        for i in 0..self.n {
            q.set(i, i, self.w[i]);
            let vi = self.latent_row(i);
            for j in (i + 1)..self.n {
                let dot: f64 = vi.iter().zip(self.latent_row(j)).map(|(a, b)| a * b).sum();
                q.set(i, j, dot);
            }
        }
        q
    }

    // Sparse forward pass for binary input: returns prediction and per-factor sums.
    fn forward_sparse(&self, ones: &[usize], sums: &mut [f64]) -> f64 {
        sums.iter_mut().for_each(|s| *s = 0.0);
        let mut y = self.w0;
        let mut sum_sq = 0.0;
        for &i in ones {
            y += self.w[i];
            for (f, s) in sums.iter_mut().enumerate() {
                let vif = self.v[i * self.k + f];
                *s += vif;
                sum_sq += vif * vif;
            }
        }
        let sq: f64 = sums.iter().map(|s| s * s).sum();
        y + 0.5 * (sq - sum_sq)
    }

    // Adds `residual_scale(y_hat) * d(y_hat)/d(theta)` into `grad`.
    fn accumulate(&self, ones: &[usize], residual_scale: impl Fn(f64) -> f64, sums: &mut [f64], grad: &mut FmModel) {
        let y = self.forward_sparse(ones, sums);
        let g = residual_scale(y);
        grad.w0 += g;
        for &i in ones {
            grad.w[i] += g;
            for f in 0..self.k {
                grad.v[i * self.k + f] += g * (sums[f] - self.v[i * self.k + f]);
            }
        }
    }

    /// `mean (y_hat - y)^2 + reg * (|w|^2 + |V|^2)`.
    pub fn loss(&self, data: &[Sample], reg: f64) -> Result<f64> {
        let mut total = 0.0;
        for s in data {
            let r = self.predict(&s.x)? - s.fom;
            total += r * r;
        }
        Ok(total / data.len().max(1) as f64 + reg * self.penalty())
    }

    fn penalty(&self) -> f64 {
        self.w.iter().map(|w| w * w).sum::<f64>() + self.v.iter().map(|v| v * v).sum::<f64>()
    }

    /// Analytic gradient of [`FmModel::loss`], shaped as a model.
    pub fn loss_gradient(&self, data: &[Sample], reg: f64) -> Result<FmModel> {
        let mut grad = FmModel::zeros(self.n, self.k);
        let mut sums = vec![0.0; self.k];
        let scale = 2.0 / data.len().max(1) as f64;
        for s in data {
            self.check_len(&s.x)?;
            let ones: Vec<usize> = s.x.ones_iter().collect();
            self.accumulate(&ones, |y| scale * (y - s.fom), &mut sums, &mut grad);
        }
        grad.add_penalty_gradient(self, reg);
        Ok(grad)
    }

    fn add_penalty_gradient(&mut self, model: &FmModel, reg: f64) {
        for (g, w) in self.w.iter_mut().zip(&model.w) {
            *g += 2.0 * reg * w;
        }
        for (g, v) in self.v.iter_mut().zip(&model.v) {
            *g += 2.0 * reg * v;
        }
    }

    fn step(&mut self, grad: &FmModel, lr: f64) {
        self.w0 -= lr * grad.w0;
        for (p, g) in self.w.iter_mut().zip(&grad.w) {
            *p -= lr * g;
        }
        for (p, g) in self.v.iter_mut().zip(&grad.v) {
            *p -= lr * g;
        }
    }

    fn clear(&mut self) {
        self.w0 = 0.0;
        self.w.iter_mut().for_each(|x| *x = 0.0);
        self.v.iter_mut().for_each(|x| *x = 0.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Standard deviation of the latent-factor initialization.
    pub init_scale: f64,
    pub regularization: f64,
    pub batch_size: usize,
    pub latent: usize,
    pub seed: u64,
    /// Continue from the previous cycle's model instead of a fresh init.
    pub warm_start: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 300,
            init_scale: 0.3,
            regularization: 1e-6,
            batch_size: 1,
            latent: DEFAULT_LATENT,
            seed: 0,
            warm_start: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.latent == 0 {
            return Err(Error::Config("epochs, batch_size and latent must be at least 1".into()));
        }
        if !(self.init_scale > 0.0) || !(self.regularization >= 0.0) {
            return Err(Error::Config("init_scale must be positive and regularization non-negative".into()));
        }
        Ok(())
    }
}

fn check_data(data: &[Sample], n: usize) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Training("empty dataset".into()));
    }
    for (i, s) in data.iter().enumerate() {
        if s.x.len() != n {
            return Err(Error::Dimension { expected: n, found: s.x.len() });
        }
        if !s.fom.is_finite() {
            return Err(Error::Data(format!("sample {i} has non-finite FOM {}", s.fom)));
        }
    }
    Ok(())
}

/// Fits a fresh model by mini-batch SGD on squared error.
pub fn fm_train(data: &[Sample], n: usize, cfg: &TrainConfig) -> Result<FmModel> {
    cfg.validate()?;
    check_data(data, n)?;
    let init = FmModel::random_init(n, cfg.latent, cfg.init_scale, cfg.seed)?;
    fm_train_from(init, data, cfg)
}

/// Continues SGD from `model`; the shuffling stream still comes from `cfg.seed`.
pub fn fm_train_from(mut model: FmModel, data: &[Sample], cfg: &TrainConfig) -> Result<FmModel> {
    cfg.validate()?;
    check_data(data, model.n)?;
    if model.k != cfg.latent {
        return Err(Error::Dimension { expected: cfg.latent, found: model.k });
    }
    let ones: Vec<Vec<usize>> = data.iter().map(|s| s.x.ones_iter().collect()).collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(cfg.seed, 0x5eed));
    let mut grad = FmModel::zeros(model.n, model.k);
    let mut sums = vec![0.0; model.k];

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.clear();
            let scale = 2.0 / batch.len() as f64;
            for &idx in batch {
                let target = data[idx].fom;
                model.accumulate(&ones[idx], |y| scale * (y - target), &mut sums, &mut grad);
            }
            grad.add_penalty_gradient(&model, cfg.regularization);
            model.step(&grad, cfg.learning_rate);
        }
    }
    if !model.is_finite() {
        return Err(Error::Training(format!(
            "parameters diverged; lower the learning rate (currently {})",
            cfg.learning_rate
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn two_bit() -> FmModel {
        FmModel::from_parts(2, 1, 0.5, vec![1.0, -2.0], vec![1.0, 2.0]).unwrap()
    }

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn predict_examples() {
        let m = two_bit();
        assert!((m.predict(&bv("11")).unwrap() - 1.5).abs() < 1e-15);
        assert!((m.predict(&bv("10")).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(m.predict(&bv("00")).unwrap(), 0.5);
        assert_eq!(m.predict(&bv("000")), Err(Error::Dimension { expected: 2, found: 3 }));
    }

    #[test]
    fn qubo_example() {
        let q = two_bit().to_qubo();
        assert_eq!(q.get(0, 0), 1.0);
        assert_eq!(q.get(1, 1), -2.0);
        assert_eq!(q.get(0, 1), 2.0);
        assert_eq!(q.offset(), 0.5);
        assert_eq!(q.energy(&bv("11")).unwrap() + q.offset(), 1.5);
    }

    #[test]
    fn zero_latent_is_diagonal() {
        let m = FmModel::from_parts(3, 2, 0.0, vec![1.0, 2.0, 3.0], vec![0.0; 6]).unwrap();
        let q = m.to_qubo();
        assert!(q.entries().all(|(i, j, _)| i == j));
    }

    #[test]
    fn from_parts_validates() {
        assert!(FmModel::from_parts(2, 1, 0.0, vec![0.0], vec![0.0; 2]).is_err());
        assert!(FmModel::from_parts(2, 1, 0.0, vec![0.0; 2], vec![0.0; 3]).is_err());
        assert!(FmModel::from_parts(1, 1, f64::NAN, vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn sparse_forward_matches_predict() {
        let m = FmModel::random_init(9, 3, 0.7, 4).unwrap();
        let mut sums = vec![0.0; 3];
        for idx in 0..512 {
            let x = BitVector::from_index(idx, 9);
            let ones: Vec<usize> = x.ones_iter().collect();
            let a = m.forward_sparse(&ones, &mut sums);
            let b = m.predict(&x).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn train_errors() {
        let cfg = TrainConfig::default();
        assert!(matches!(fm_train(&[], 4, &cfg), Err(Error::Training(_))));
        let nan = [Sample { x: bv("0101"), fom: f64::NAN }];
        assert!(matches!(fm_train(&nan, 4, &cfg), Err(Error::Data(_))));
        let bad = TrainConfig { learning_rate: 0.0, ..Default::default() };
        let ok = [Sample { x: bv("0101"), fom: 1.0 }];
        assert!(matches!(fm_train(&ok, 4, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn single_sample_interpolates() {
        let x = bv("0110100111");
        let data = [Sample { x: x.clone(), fom: 2.75 }];
        let m = fm_train(&data, 10, &TrainConfig::default()).unwrap();
        assert!((m.predict(&x).unwrap() - 2.75).abs() < 1e-3);
    }

    #[test]
    fn deterministic_training() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<Sample> = (0..40)
            .map(|_| Sample {
                x: BitVector::from_index(rng.random_range(0..4096), 12),
                fom: rng.random_range(0.0..3.0),
            })
            .collect();
        let cfg = TrainConfig { epochs: 20, seed: 3, ..Default::default() };
        let a = fm_train(&data, 12, &cfg).unwrap();
        let b = fm_train(&data, 12, &cfg).unwrap();
        assert_eq!(a, b);
        let c = fm_train(&data, 12, &TrainConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(a, c);
    }
}
