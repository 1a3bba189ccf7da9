//! Scoring of radiative-cooling window designs: decode, transfer matrix, FOM.

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::active::Evaluator;
use crate::encoding::{decode, BitVector, Material};
use crate::error::{Error, Result};
use crate::fom::{fom_spectra, IdealProfile, SolarSpectrum};
use crate::optics::{MaterialSet, OpticalModel, Spectrum, WavelengthGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Semi-infinite incident medium. PDMS stands in for the thick emitter
    /// film on top of the stack; `Air` drops it.
    pub superstrate: Material,
    pub grid: WavelengthGrid,
    pub ideal: IdealProfile,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            superstrate: Material::Pdms,
            grid: WavelengthGrid::default(),
            ideal: IdealProfile::default(),
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.ideal.validate()?;
        if self.superstrate.is_candidate() && self.superstrate != Material::SiO2 {
            return Err(Error::Config(format!(
                "superstrate must be PDMS, Air or SiO2, got {}",
                self.superstrate
            )));
        }
        Ok(())
    }
}


#[derive(Debug, Clone)]
pub struct WindowEvaluator {
    optics: OpticalModel,
    superstrate: Material,
    ideal: Spectrum,
    solar: SolarSpectrum,
}

impl WindowEvaluator {
    /// `solar` must already be on `cfg.grid`.
    pub fn new(materials: &MaterialSet, solar: SolarSpectrum, cfg: &WindowConfig) -> Result<Self> {
        cfg.validate()?;
        if solar.grid() != cfg.grid {
            return Err(Error::Data("solar spectrum is not on the configured grid".into()));
        }
        let optics = OpticalModel::new(materials, cfg.grid)?;
        Ok(Self {
            optics,
            superstrate: cfg.superstrate,
            ideal: cfg.ideal.spectrum(cfg.grid),
            solar,
        })
    }

    pub fn transmittance(&self, x: &BitVector) -> Result<Spectrum> {
        let stack = decode(x)?.with_superstrate(self.superstrate);
        self.optics.transmittance(&stack)
    }

    pub fn solar(&self) -> &SolarSpectrum {
        &self.solar
    }
}

impl Evaluator for WindowEvaluator {
    fn evaluate(&self, x: &BitVector) -> Result<f64> {
        fom_spectra(&self.transmittance(x)?, &self.ideal, &self.solar)
    }
}
