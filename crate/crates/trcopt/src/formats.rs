//! CSV file formats.
//!
//! | file            | header                                   |
//! |-----------------|------------------------------------------|
//! | material table  | `wavelength_nm,n,k`                      |
//! | solar spectrum  | `wavelength_nm,irradiance`               |
//! | trajectory      | `cycle,bitstring,fom`                    |
//! | dataset         | `bitstring,fom`                          |
//! | best design     | `bitstring,fom`                          |
//! | spectrum        | `wavelength_nm,value`                    |
//! | curve           | `cycle,fit,gradient`                     |
//! | report          | `method,threshold,initiation_cycle`      |
//! | sweep summary   | `n_bits,n_initial,seed,initiation_cycle` |
//!
//! Floats are written in Rust's shortest round-trip form, so every file
//! reloads bit-exactly. Bit strings are contiguous; a missing initiation
//! point is written `none`.

use std::io::{Read, Write};
use std::path::Path;

use trcopt_core::convergence::{format_cycle, ConvergenceReport, Method, RegressionCurve};
use trcopt_core::fom::SolarSpectrum;
use trcopt_core::{BitVector, Dataset, Material, MaterialTable, Sample, Spectrum, Trajectory, TrajectoryPoint, WavelengthGrid};

use crate::error::{Error, Result};

/// Data rows of a headed CSV file with their 1-based line numbers.
fn read_rows(reader: impl Read, path: &Path, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let found = rdr
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let matches = found.len() == header.len()
        && found.iter().zip(header).all(|(a, b)| a.eq_ignore_ascii_case(b));
    if !matches {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(Error::parse(path, line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn float(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {field:?}")))
}

fn bits(path: &Path, line: u64, field: &str) -> Result<BitVector> {
    field
        .parse::<BitVector>()
        .map_err(|e| Error::parse(path, line, e.to_string()))
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

pub fn load_material_table(reader: impl Read, path: &Path, material: Material) -> Result<MaterialTable> {
    let rows = read_rows(reader, path, &["wavelength_nm", "n", "k"])?
        .into_iter()
        .map(|(line, r)| {
            Ok((
                float(path, line, &r[0], "wavelength")?,
                float(path, line, &r[1], "n")?,
                float(path, line, &r[2], "k")?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    MaterialTable::from_rows(material, rows).map_err(|source| Error::Ingestion { path: path.into(), source })
}

pub fn load_solar_spectrum(reader: impl Read, path: &Path, grid: WavelengthGrid) -> Result<SolarSpectrum> {
    let rows = read_rows(reader, path, &["wavelength_nm", "irradiance"])?
        .into_iter()
        .map(|(line, r)| Ok((float(path, line, &r[0], "wavelength")?, float(path, line, &r[1], "irradiance")?)))
        .collect::<Result<Vec<_>>>()?;
    SolarSpectrum::from_rows(&rows, grid).map_err(|source| Error::Ingestion { path: path.into(), source })
}

pub fn write_trajectory(mut w: impl Write, t: &Trajectory, path: &Path) -> Result<()> {
    let mut out = String::from("cycle,bitstring,fom\n");
    for p in &t.points {
        out.push_str(&format!("{},{},{}\n", p.cycle, p.x, p.fom));
    }
    w.write_all(out.as_bytes()).map_err(io(path))
}

pub fn read_trajectory(reader: impl Read, path: &Path) -> Result<Trajectory> {
    let mut points = Vec::new();
    for (line, r) in read_rows(reader, path, &["cycle", "bitstring", "fom"])? {
        let cycle = r[0]
            .parse::<usize>()
            .map_err(|_| Error::parse(path, line, format!("invalid cycle {:?}", r[0])))?;
        if let Some(prev) = points.last().map(|p: &TrajectoryPoint| p.cycle) {
            if cycle <= prev {
                return Err(Error::parse(path, line, format!("cycle {cycle} does not follow {prev}")));
            }
        }
        points.push(TrajectoryPoint {
            cycle,
            x: bits(path, line, &r[1])?,
            fom: float(path, line, &r[2], "fom")?,
        });
    }
    Ok(Trajectory { points })
}

fn write_samples<'a>(mut w: impl Write, samples: impl Iterator<Item = &'a Sample>, path: &Path) -> Result<()> {
    let mut out = String::from("bitstring,fom\n");
    for s in samples {
        out.push_str(&format!("{},{}\n", s.x, s.fom));
    }
    w.write_all(out.as_bytes()).map_err(io(path))
}

pub fn write_dataset(w: impl Write, d: &Dataset, path: &Path) -> Result<()> {
    write_samples(w, d.samples().iter(), path)
}

pub fn read_dataset(reader: impl Read, path: &Path) -> Result<Dataset> {
    let mut d = Dataset::new();
    for (line, r) in read_rows(reader, path, &["bitstring", "fom"])? {
        let s = Sample { x: bits(path, line, &r[0])?, fom: float(path, line, &r[1], "fom")? };
        d.push(s).map_err(|e| Error::parse(path, line, e.to_string()))?;
    }
    Ok(d)
}

pub fn write_best(w: impl Write, best: &Sample, path: &Path) -> Result<()> {
    write_samples(w, std::iter::once(best), path)
}

pub fn write_spectrum(mut w: impl Write, s: &Spectrum, path: &Path) -> Result<()> {
    let mut out = String::from("wavelength_nm,value\n");
    for (wl, v) in s.iter() {
        out.push_str(&format!("{wl},{v}\n"));
    }
    w.write_all(out.as_bytes()).map_err(io(path))
}

pub fn write_curve(mut w: impl Write, c: &RegressionCurve, path: &Path) -> Result<()> {
    let mut out = String::from("cycle,fit,gradient\n");
    for ((cycle, fit), g) in c.cycles.iter().zip(&c.values).zip(&c.gradients) {
        out.push_str(&format!("{cycle},{fit},{g}\n"));
    }
    w.write_all(out.as_bytes()).map_err(io(path))
}

pub fn write_report(mut w: impl Write, r: &ConvergenceReport, path: &Path) -> Result<()> {
    let text = format!(
        "method,threshold,initiation_cycle\n{},{},{}\n",
        r.method,
        r.threshold,
        format_cycle(r.initiation_cycle)
    );
    w.write_all(text.as_bytes()).map_err(io(path))
}

pub fn read_report(reader: impl Read, path: &Path) -> Result<ConvergenceReport> {
    let rows = read_rows(reader, path, &["method", "threshold", "initiation_cycle"])?;
    let (line, r) = match rows.as_slice() {
        [row] => row,
        _ => return Err(Error::parse(path, 2, format!("expected one report row, found {}", rows.len()))),
    };
    let method: Method = r[0].parse().map_err(|e: trcopt_core::Error| Error::parse(path, *line, e.to_string()))?;
    let threshold = float(path, *line, &r[1], "threshold")?;
    let initiation_cycle = match r[2].as_str() {
        "none" => None,
        s => Some(float(path, *line, s, "initiation cycle")?),
    };
    Ok(ConvergenceReport { method, threshold, initiation_cycle })
}
