//! Surrogate-based active learning for binary-encoded multilayer optics.
//!
//! A factorization machine is fitted to evaluated designs, converted to a
//! QUBO, and minimized by simulated annealing to propose the next design.
//! Designs are scored by a solar-weighted transmittance figure of merit
//! computed with the transfer-matrix method, and the resulting FOM
//! trajectories are analyzed with polynomial and piecewise-linear
//! regressions to locate where convergence starts.
//!
//! The crate is `no_std` and needs only `alloc`; file formats and the
//! command line live in the `trcopt` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod active;
pub mod anneal;
pub mod convergence;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod fm;
pub mod fom;
pub mod optics;
pub mod qubo;
pub mod seed;
pub mod window;

pub use anneal::{anneal, AnnealConfig, Solution};
pub use dataset::{Dataset, Sample};
pub use encoding::{decode, encode, BitVector, Layer, LayerStack, Material};
pub use error::{Error, Result};
pub use fm::{fm_train, FmModel, TrainConfig};
pub use qubo::{brute_force_min, qubo_energy, Qubo};
pub use active::{run, seed_dataset, Evaluator, RunConfig, RunOutput, Trajectory, TrajectoryPoint};
pub use optics::{MaterialSet, MaterialTable, Spectrum, WavelengthGrid};
pub use window::{WindowConfig, WindowEvaluator};
