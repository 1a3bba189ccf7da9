//! Solar-weighted figure of merit against an ideal band-pass window.
//!
//! `FOM = 10 * int[(T_ideal S)^2 - (T S)^2] dl / int S^2 dl` over the grid,
//! trapezoidal rule. Lower is better; 0 means the designed window matches the
//! ideal one.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{Spectrum, WavelengthGrid, BAND_MAX_NM, BAND_MIN_NM};

/// Solar spectral irradiance resampled onto a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarSpectrum {
    spectrum: Spectrum,
}

impl SolarSpectrum {
    /// Resamples tabulated `(wavelength nm, irradiance)` rows onto `grid` by
    /// linear interpolation. Rows must be increasing, non-negative, and cover the grid.
    pub fn from_rows(rows: &[(f64, f64)], grid: WavelengthGrid) -> Result<Self> {
        for (i, &(wl, s)) in rows.iter().enumerate() {
            if !(wl.is_finite() && s.is_finite()) {
                return Err(Error::Ingestion(format!("solar row {i} is not finite")));
            }
            if s < 0.0 {
                return Err(Error::Ingestion(format!("solar row {i} has negative irradiance {s}")));
            }
            if i > 0 && wl <= rows[i - 1].0 {
                return Err(Error::Ingestion(format!(
                    "solar wavelengths not strictly increasing at row {i} ({wl} nm)"
                )));
            }
        }
        let (lo, hi) = match (rows.first(), rows.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => return Err(Error::Ingestion("solar table is empty".into())),
        };
        let need_lo = grid.start_nm.min(BAND_MIN_NM);
        let need_hi = grid.end_nm().max(BAND_MAX_NM);
        if lo > need_lo || hi < need_hi {
            return Err(Error::Ingestion(format!(
                "solar table covers {lo}-{hi} nm, needs {need_lo}-{need_hi} nm"
            )));
        }
        let values = grid
            .points()
            .map(|wl| {
                let upper = rows.partition_point(|r| r.0 < wl);
                if upper == 0 {
                    return rows[0].1;
                }
                let (w0, s0) = rows[upper - 1];
                let (w1, s1) = rows[upper];
                s0 + (wl - w0) / (w1 - w0) * (s1 - s0)
            })
            .collect();
        Ok(Self { spectrum: Spectrum { grid, values } })
    }

    /// Wraps an already-gridded spectrum.
    pub fn from_spectrum(spectrum: Spectrum) -> Result<Self> {
        if spectrum.values.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Ingestion("solar irradiance must be finite and non-negative".into()));
        }
        Ok(Self { spectrum })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn grid(&self) -> WavelengthGrid {
        self.spectrum.grid
    }

    /// Uniformly rescaled copy.
    pub fn scaled(&self, factor: f64) -> Self {
        let values = self.spectrum.values.iter().map(|v| v * factor).collect();
        Self { spectrum: Spectrum { grid: self.spectrum.grid, values } }
    }
}

/// Ideal window: unity transmission inside `[visible_min_nm, visible_max_nm]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdealProfile {
    pub visible_min_nm: f64,
    pub visible_max_nm: f64,
}

impl Default for IdealProfile {
    fn default() -> Self {
        Self { visible_min_nm: 400.0, visible_max_nm: 700.0 }
    }
}

impl IdealProfile {
    pub fn new(visible_min_nm: f64, visible_max_nm: f64) -> Result<Self> {
        let p = Self { visible_min_nm, visible_max_nm };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(BAND_MIN_NM < self.visible_min_nm
            && self.visible_min_nm < self.visible_max_nm
            && self.visible_max_nm < BAND_MAX_NM)
        {
            return Err(Error::Config(format!(
                "visible band must satisfy {BAND_MIN_NM} < lower < upper < {BAND_MAX_NM}, got {}-{}",
                self.visible_min_nm, self.visible_max_nm
            )));
        }
        Ok(())
    }

    pub fn transmission(&self, wavelength_nm: f64) -> f64 {
        if wavelength_nm >= self.visible_min_nm && wavelength_nm <= self.visible_max_nm {
            1.0
        } else {
            0.0
        }
    }

    pub fn spectrum(&self, grid: WavelengthGrid) -> Spectrum {
        Spectrum::from_fn(grid, |wl| self.transmission(wl))
    }
}

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

fn same_grid(a: &WavelengthGrid, b: &WavelengthGrid) -> Result<()> {
    if a != b {
        return Err(if a.count != b.count {
            Error::Dimension { expected: a.count, found: b.count }
        } else {
            Error::Data(format!("wavelength grids differ: {a:?} vs {b:?}"))
        });
    }
    Ok(())
}

/// Figure of merit of `designed` against an explicit ideal transmission spectrum.
pub fn fom_spectra(designed: &Spectrum, ideal: &Spectrum, solar: &SolarSpectrum) -> Result<f64> {
    let s = solar.spectrum();
    same_grid(&s.grid, &designed.grid)?;
    same_grid(&s.grid, &ideal.grid)?;
    let diff: Vec<f64> = s
        .values
        .iter()
        .zip(&ideal.values)
        .zip(&designed.values)
        .map(|((s, ti), td)| {
            let a = ti * s;
            let b = td * s;
            a * a - b * b
        })
        .collect();
    let norm: Vec<f64> = s.values.iter().map(|v| v * v).collect();
    let denom = trapezoid(&norm, s.grid.step_nm);
    if !(denom > 0.0) {
        return Err(Error::Data("solar spectrum has zero weight on the grid".into()));
    }
    Ok(10.0 * trapezoid(&diff, s.grid.step_nm) / denom)
}

/// Figure of merit of `designed` against `ideal`, weighted by `solar`.
pub fn fom(designed: &Spectrum, ideal: &IdealProfile, solar: &SolarSpectrum) -> Result<f64> {
    fom_spectra(designed, &ideal.spectrum(solar.grid()), solar)
}
