//! Material tables and the solar spectrum.
//!
//! The bundled tables are compiled into the binary. Setting `TRCOPT_DATA_DIR`
//! points the default source at a directory with the same layout instead:
//! `materials/<name>.csv` and `solar/astm_g173_global.csv`.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trcopt_core::fom::SolarSpectrum;
use trcopt_core::{Material, MaterialSet, MaterialTable, WavelengthGrid};

use crate::error::{Error, Result};
use crate::formats::{load_material_table, load_solar_spectrum};

pub const DATA_DIR_ENV: &str = "TRCOPT_DATA_DIR";
pub const SOLAR_FILE: &str = "solar/astm_g173_global.csv";

const BUILTIN_SOLAR: &str = include_str!("../data/solar/astm_g173_global.csv");
const BUILTIN_MATERIALS: [(Material, &str); 5] = [
    (Material::SiO2, include_str!("../data/materials/sio2.csv")),
    (Material::Si3N4, include_str!("../data/materials/si3n4.csv")),
    (Material::Al2O3, include_str!("../data/materials/al2o3.csv")),
    (Material::TiO2, include_str!("../data/materials/tio2.csv")),
    (Material::Pdms, include_str!("../data/materials/pdms.csv")),
];

pub fn material_file(m: Material) -> String {
    format!("materials/{}.csv", m.name().to_ascii_lowercase())
}

/// Where optical constants come from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialSource {
    /// `TRCOPT_DATA_DIR` if set, otherwise the bundled tables.
    #[default]
    Default,
    /// Bundled tables regardless of the environment.
    Builtin,
    /// Dispersionless indices.
    Constant,
    Dir(PathBuf),
}

impl std::str::FromStr for MaterialSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "default" => MaterialSource::Default,
            "builtin" => MaterialSource::Builtin,
            "constant" => MaterialSource::Constant,
            dir => MaterialSource::Dir(dir.into()),
        })
    }
}

fn env_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn builtin_materials() -> Result<MaterialSet> {
    let mut set = MaterialSet::new();
    for (m, text) in BUILTIN_MATERIALS {
        let label = PathBuf::from(format!("<builtin>/{}", material_file(m)));
        set.insert(load_material_table(text.as_bytes(), &label, m)?);
    }
    Ok(set)
}

pub fn materials_from_dir(dir: &Path) -> Result<MaterialSet> {
    let mut set = MaterialSet::new();
    for m in Material::CANDIDATES.iter().copied().chain([Material::Pdms]) {
        let path = dir.join(material_file(m));
        set.insert(load_material_table(open(&path)?, &path, m)?);
    }
    Ok(set)
}

pub fn load_materials(source: &MaterialSource) -> Result<MaterialSet> {
    match source {
        MaterialSource::Default => match env_dir() {
            Some(dir) => materials_from_dir(&dir),
            None => builtin_materials(),
        },
        MaterialSource::Builtin => builtin_materials(),
        MaterialSource::Constant => Ok(MaterialSet::constant_fallback()),
        MaterialSource::Dir(dir) => materials_from_dir(dir),
    }
}

/// Loads the solar spectrum from `file`, `TRCOPT_DATA_DIR`, or the bundled copy.
pub fn load_solar(file: Option<&Path>, grid: WavelengthGrid) -> Result<SolarSpectrum> {
    let path = file.map(Path::to_path_buf).or_else(|| env_dir().map(|d| d.join(SOLAR_FILE)));
    match path {
        Some(p) => load_solar_spectrum(open(&p)?, &p, grid),
        None => load_solar_spectrum(BUILTIN_SOLAR.as_bytes(), Path::new("<builtin>/solar/astm_g173_global.csv"), grid),
    }
}

/// Single table from an arbitrary CSV file.
pub fn load_table_file(path: &Path, material: Material) -> Result<MaterialTable> {
    load_material_table(open(path)?, path, material)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_cover_band() {
        let set = builtin_materials().unwrap();
        for m in Material::CANDIDATES.iter().copied().chain([Material::Pdms]) {
            let (lo, hi) = set.get(m).unwrap().range();
            assert!(lo <= 300.0 && hi >= 2500.0, "{m}");
        }
        let sio2 = set.get(Material::SiO2).unwrap().index_at(550.0).unwrap();
        assert!((sio2.re - 1.46).abs() < 0.01);
    }

    #[test]
    fn builtin_solar_loads() {
        let s = load_solar(None, WavelengthGrid::default()).unwrap();
        assert_eq!(s.spectrum().values.len(), 441);
        assert!(s.spectrum().values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn missing_directory_names_file() {
        let err = materials_from_dir(Path::new("/nonexistent/trcopt")).unwrap_err();
        assert!(err.to_string().contains("sio2.csv"), "{err}");
    }
}
