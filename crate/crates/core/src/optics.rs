//! Normal-incidence transfer-matrix transmittance of coherent thin-film stacks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{LayerStack, Material};
use crate::error::{Error, Result};

/// Lower edge of the solar band, nm.
pub const BAND_MIN_NM: f64 = 300.0;
/// Upper edge of the solar band, nm.
pub const BAND_MAX_NM: f64 = 2500.0;

/// Tabulated complex refractive index `n + i kappa` against wavelength,
/// linearly interpolated between rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    material: Material,
    // (wavelength nm, n, kappa), strictly increasing in wavelength
    rows: Vec<(f64, f64, f64)>,
}

impl MaterialTable {
    /// Validates rows: strictly increasing wavelengths, `n > 0`, `kappa >= 0`,
    /// and coverage of the full solar band.
    pub fn from_rows(material: Material, rows: Vec<(f64, f64, f64)>) -> Result<Self> {
        for (i, &(wl, n, k)) in rows.iter().enumerate() {
            if !(wl.is_finite() && n.is_finite() && k.is_finite()) {
                return Err(Error::Ingestion(format!("{material}: row {i} is not finite")));
            }
            if n <= 0.0 {
                return Err(Error::Ingestion(format!("{material}: row {i} has n = {n} <= 0")));
            }
            if k < 0.0 {
                return Err(Error::Ingestion(format!("{material}: row {i} has k = {k} < 0")));
            }
            if i > 0 && wl <= rows[i - 1].0 {
                return Err(Error::Ingestion(format!(
                    "{material}: wavelengths not strictly increasing at row {i} ({wl} nm)"
                )));
            }
        }
        let (lo, hi) = match (rows.first(), rows.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => return Err(Error::Ingestion(format!("{material}: table is empty"))),
        };
        if lo > BAND_MIN_NM || hi < BAND_MAX_NM {
            return Err(Error::Ingestion(format!(
                "{material}: table covers {lo}-{hi} nm, needs {BAND_MIN_NM}-{BAND_MAX_NM} nm"
            )));
        }
        Ok(Self { material, rows })
    }

    /// Dispersionless, lossless table over the solar band.
    pub fn constant(material: Material, n: f64) -> Self {
        Self {
            material,
            rows: alloc::vec![(BAND_MIN_NM, n, 0.0), (BAND_MAX_NM, n, 0.0)],
        }
    }

    pub fn material(&self) -> Material {
        self.material
    }

    pub fn rows(&self) -> &[(f64, f64, f64)] {
        &self.rows
    }

    pub fn range(&self) -> (f64, f64) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].0)
    }

    /// Complex index at `wavelength_nm`; outside the table is an error.
    pub fn index_at(&self, wavelength_nm: f64) -> Result<Complex64> {
        let (lo, hi) = self.range();
        if !(wavelength_nm >= lo && wavelength_nm <= hi) {
            return Err(Error::Optics(format!(
                "{}: {wavelength_nm} nm outside table range {lo}-{hi} nm",
                self.material
            )));
        }
        let upper = self.rows.partition_point(|r| r.0 < wavelength_nm);
        if upper == 0 {
            let r = self.rows[0];
            return Ok(Complex64::new(r.1, r.2));
        }
        let (w0, n0, k0) = self.rows[upper - 1];
        let (w1, n1, k1) = self.rows[upper];
        let t = (wavelength_nm - w0) / (w1 - w0);
        Ok(Complex64::new(n0 + t * (n1 - n0), k0 + t * (k1 - k0)))
    }
}

/// Tables keyed by material. Air needs no table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialSet {
    tables: BTreeMap<Material, MaterialTable>,
}

impl MaterialSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table: MaterialTable) {
        self.tables.insert(table.material, table);
    }

    pub fn get(&self, m: Material) -> Option<&MaterialTable> {
        self.tables.get(&m)
    }

    /// Dispersionless fallback: SiO2 1.45, Si3N4 2.0, Al2O3 1.66, TiO2 2.4, PDMS 1.41.
    pub fn constant_fallback() -> Self {
        let mut set = Self::new();
        for (m, n) in [
            (Material::SiO2, 1.45),
            (Material::Si3N4, 2.0),
            (Material::Al2O3, 1.66),
            (Material::TiO2, 2.4),
            (Material::Pdms, 1.41),
        ] {
            set.insert(MaterialTable::constant(m, n));
        }
        set
    }
}

/// Uniform wavelength grid in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavelengthGrid {
    pub start_nm: f64,
    pub step_nm: f64,
    pub count: usize,
}

impl Default for WavelengthGrid {
    /// 300-2500 nm in 5 nm steps.
    fn default() -> Self {
        Self {
            start_nm: BAND_MIN_NM,
            step_nm: 5.0,
            count: 441,
        }
    }
}

impl WavelengthGrid {
    pub fn new(start_nm: f64, step_nm: f64, count: usize) -> Result<Self> {
        let g = Self { start_nm, step_nm, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 || !(self.step_nm > 0.0) || !(self.start_nm > 0.0) {
            return Err(Error::Config(format!(
                "wavelength grid needs count >= 2 and positive start/step, got {self:?}"
            )));
        }
        Ok(())
    }

    /// A single-wavelength "grid", for point evaluations.
    pub fn single(wavelength_nm: f64) -> Self {
        Self { start_nm: wavelength_nm, step_nm: 1.0, count: 1 }
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start_nm + self.step_nm * i as f64
    }

    pub fn end_nm(&self) -> f64 {
        self.at(self.count - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.at(i))
    }
}

/// Per-wavelength values on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: WavelengthGrid,
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: WavelengthGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::Dimension { expected: grid.count, found: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: WavelengthGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }
}

/// Material indices resolved once onto a grid, for repeated stack evaluation.
#[derive(Debug, Clone)]
pub struct OpticalModel {
    grid: WavelengthGrid,
    indices: BTreeMap<Material, Vec<Complex64>>,
}

impl OpticalModel {
    /// Resolves every table in `set` onto `grid`; tables not covering the grid are an error.
    pub fn new(set: &MaterialSet, grid: WavelengthGrid) -> Result<Self> {
        if grid.count == 0 {
            return Err(Error::Optics("empty wavelength grid".into()));
        }
        let mut indices = BTreeMap::new();
        for (m, table) in &set.tables {
            let values = grid
                .points()
                .map(|wl| table.index_at(wl))
                .collect::<Result<Vec<_>>>()?;
            indices.insert(*m, values);
        }
        indices.insert(Material::Air, alloc::vec![Complex64::new(1.0, 0.0); grid.count]);
        Ok(Self { grid, indices })
    }

    pub fn grid(&self) -> WavelengthGrid {
        self.grid
    }

    fn indices(&self, m: Material) -> Result<&[Complex64]> {
        self.indices
            .get(&m)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Optics(format!("no dispersion table for {m}")))
    }

    /// Intensity transmittance of `stack` at every grid wavelength, clamped to [0, 1].
    pub fn transmittance(&self, stack: &LayerStack) -> Result<Spectrum> {
        let sup = self.indices(stack.superstrate)?;
        let sub = self.indices(stack.substrate)?;
        let layers = stack
            .layers
            .iter()
            .map(|l| Ok((self.indices(l.material)?, l.thickness_nm)))
            .collect::<Result<Vec<_>>>()?;
        let values = (0..self.grid.count)
            .map(|w| {
                let wl = self.grid.at(w);
                let layer_iter = layers.iter().map(|(idx, d)| (idx[w], *d));
                stack_transmittance(sup[w], sub[w], layer_iter, wl)
            })
            .collect();
        Ok(Spectrum { grid: self.grid, values })
    }
}

/// Characteristic-matrix transmittance at a single wavelength.
///
/// Indices are `n + i kappa`; each layer contributes
/// `[[cos d, -i sin d / eta], [-i eta sin d, cos d]]` with `d = 2 pi eta t / lambda`,
/// which is the loss-consistent sign for that index convention.
pub fn stack_transmittance(
    superstrate: Complex64,
    substrate: Complex64,
    layers: impl Iterator<Item = (Complex64, f64)>,
    wavelength_nm: f64,
) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let (mut m11, mut m12, mut m21, mut m22) = (one, zero, zero, one);
    for (eta, thickness) in layers {
        let delta = eta * (2.0 * PI * thickness / wavelength_nm);
        let (c, s) = (delta.cos(), delta.sin());
        let a12 = -i * s / eta;
        let a21 = -i * eta * s;
        let (n11, n12) = (m11 * c + m12 * a21, m11 * a12 + m12 * c);
        let (n21, n22) = (m21 * c + m22 * a21, m21 * a12 + m22 * c);
        m11 = n11;
        m12 = n12;
        m21 = n21;
        m22 = n22;
    }
    let eta0 = superstrate;
    let etas = substrate;
    let denom = eta0 * m11 + eta0 * etas * m12 + m21 + etas * m22;
    let t = eta0 * 2.0 / denom;
    let value = etas.re / eta0.re * t.norm_sqr();
    value.clamp(0.0, 1.0)
}

/// Builds an [`OpticalModel`] and evaluates one stack.
pub fn transmittance(stack: &LayerStack, set: &MaterialSet, grid: WavelengthGrid) -> Result<Spectrum> {
    OpticalModel::new(set, grid)?.transmittance(stack)
}
