//! Quadratic unconstrained binary optimization problems.

use alloc::vec;
use alloc::vec::Vec;

use crate::encoding::BitVector;
use crate::error::{Error, Result};

/// Largest instance [`brute_force_min`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Upper-triangular QUBO `x^T Q x` plus a constant offset.
///
/// The offset is carried for bookkeeping only; [`Qubo::energy`] never adds it.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    n: usize,
    // row-major n*n, only i <= j entries are used
    coefficients: Vec<f64>,
    offset: f64,
}

impl Qubo {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coefficients: vec![0.0; n * n],
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        assert!(b < self.n, "qubo index ({i}, {j}) out of range for n = {}", self.n);
        a * self.n + b
    }

    /// Coefficient of `x_i x_j`; `(i, j)` and `(j, i)` name the same entry.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coefficients[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.coefficients[k] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.coefficients[k] += value;
    }

    /// Non-zero entries as `(i, j, value)` with `i <= j`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i..self.n).filter_map(move |j| {
                let v = self.coefficients[i * self.n + j];
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    pub fn is_finite(&self) -> bool {
        self.offset.is_finite() && self.coefficients.iter().all(|c| c.is_finite())
    }

    /// Largest coefficient magnitude, 0 for an all-zero problem.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j`, offset excluded.
    pub fn energy(&self, x: &BitVector) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: x.len(),
            });
        }
        let ones: Vec<usize> = x.ones_iter().collect();
        let mut e = 0.0;
        for (a, &i) in ones.iter().enumerate() {
            let row = &self.coefficients[i * self.n..(i + 1) * self.n];
            e += row[i];
            for &j in &ones[a + 1..] {
                e += row[j];
            }
        }
        Ok(e)
    }
}

/// Free-function form of [`Qubo::energy`].
pub fn qubo_energy(q: &Qubo, x: &BitVector) -> Result<f64> {
    q.energy(x)
}

/// Exhaustive global minimum; ties go to the lexicographically smallest string.
pub fn brute_force_min(q: &Qubo) -> Result<(BitVector, f64)> {
    let n = q.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Size {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best_index = 0u64;
    let mut best = f64::INFINITY;
    // indices enumerate bit strings in lexicographic order, so strict < keeps the first tie
    for index in 0..(1u64 << n) {
        let e = q.energy(&BitVector::from_index(index, n))?;
        if e < best {
            best = e;
            best_index = index;
        }
    }
    Ok((BitVector::from_index(best_index, n), best))
}
