//! Regression analysis of FOM trajectories.
//!
//! Fits are made against the cycle axis divided by `cycle_scale` (1000 by
//! default), so gradients are FOM per kilocycle. Convergence starts at the
//! first cycle whose fitted gradient reaches the (negative) threshold.
//!
//! * [`fit_polynomial`]: least-squares polynomial, analytic derivative.
//! * [`fit_piecewise`]: continuous piecewise-linear least squares on a regular
//!   breakpoint grid, optionally shifted by a fraction of one interval.
//! * [`fit_averaged_piecewise`]: pointwise mean of five 20-piece fits with grid
//!   offsets 0, 0.2, 0.4, 0.6 and 0.8.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::active::Trajectory;
use crate::error::{Error, Result};

pub const DEFAULT_CYCLE_SCALE: f64 = 1000.0;
pub const DEFAULT_THRESHOLD: f64 = -3.0;
pub const AVERAGED_PIECES: usize = 20;
pub const AVERAGED_OFFSETS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

/// Observations against cycle number.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub cycles: Vec<f64>,
    pub values: Vec<f64>,
    pub cycle_scale: f64,
}

impl Series {
    pub fn new(cycles: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if cycles.len() != values.len() {
            return Err(Error::Dimension { expected: cycles.len(), found: values.len() });
        }
        if cycles.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Analysis("series contains non-finite values".into()));
        }
        if cycles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Analysis("cycles must be strictly increasing".into()));
        }
        Ok(Self { cycles, values, cycle_scale: DEFAULT_CYCLE_SCALE })
    }

    pub fn from_fn(cycles: impl IntoIterator<Item = f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let cycles: Vec<f64> = cycles.into_iter().collect();
        let values = cycles.iter().map(|&c| f(c)).collect();
        Self::new(cycles, values)
    }

    pub fn with_cycle_scale(mut self, scale: f64) -> Self {
        self.cycle_scale = scale;
        self
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    fn scaled(&self) -> Vec<f64> {
        self.cycles.iter().map(|c| c / self.cycle_scale).collect()
    }
}

impl TryFrom<&Trajectory> for Series {
    type Error = Error;

    fn try_from(t: &Trajectory) -> Result<Self> {
        Series::new(t.cycles(), t.foms())
    }
}

/// Fitted values and gradients (per `cycle_scale` cycles) on the series' cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCurve {
    pub cycles: Vec<f64>,
    pub values: Vec<f64>,
    pub gradients: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Polynomial(usize),
    Piecewise(usize),
    Averaged,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Polynomial(d) => write!(f, "poly-{d}"),
            Method::Piecewise(p) => write!(f, "pw-{p}"),
            Method::Averaged => f.write_str("averaged"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// `poly-<degree>`, `pw-<pieces>` or `averaged`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Analysis(format!("unknown method {s:?}; expected poly-<d>, pw-<p> or averaged"));
        let s = s.trim();
        if s == "averaged" {
            return Ok(Method::Averaged);
        }
        let (kind, num) = s.split_once('-').ok_or_else(bad)?;
        let num: usize = num.parse().map_err(|_| bad())?;
        match kind {
            "poly" => Ok(Method::Polynomial(num)),
            "pw" => Ok(Method::Piecewise(num)),
            _ => Err(bad()),
        }
    }
}

impl Method {
    pub fn fit(&self, series: &Series) -> Result<RegressionCurve> {
        match *self {
            Method::Polynomial(d) => fit_polynomial(series, d),
            Method::Piecewise(p) => fit_piecewise(series, p, 0.0),
            Method::Averaged => fit_averaged_piecewise(series),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub method: Method,
    pub threshold: f64,
    pub initiation_cycle: Option<f64>,
}

/// Fits `series` with `method` and locates the initiation point.
pub fn analyze(series: &Series, method: Method, threshold: f64) -> Result<(RegressionCurve, ConvergenceReport)> {
    let curve = method.fit(series)?;
    let initiation_cycle = initiation_point(&curve, threshold);
    Ok((curve, ConvergenceReport { method, threshold, initiation_cycle }))
}

fn least_squares(design: DMatrix<f64>, rhs: DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let cols = design.ncols();
    let svd = design.svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if svd.singular_values.len() < cols || !(min > max * 1e-12) {
        return Err(Error::Analysis(format!("{what}: design matrix is rank deficient")));
    }
    svd.solve(&rhs, 0.0)
        .map_err(|e| Error::Analysis(format!("{what}: {e}")))
}

/// Polynomial in scaled cycles, stored against a centred unit variable for conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    centre: f64,
    half_width: f64,
    coefficients: Vec<f64>,
}

impl Polynomial {
    fn unit(&self, t: f64) -> f64 {
        (t - self.centre) / self.half_width
    }

    pub fn value(&self, t: f64) -> f64 {
        let u = self.unit(t);
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let u = self.unit(t);
        let d = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (p, c)| acc * u + p as f64 * c);
        d / self.half_width
    }
}

pub fn polynomial_model(series: &Series, degree: usize) -> Result<Polynomial> {
    if degree == 0 {
        return Err(Error::Analysis("polynomial degree must be at least 1".into()));
    }
    if series.len() <= degree {
        return Err(Error::Analysis(format!(
            "degree {degree} fit needs more than {degree} points, got {}",
            series.len()
        )));
    }
    let t = series.scaled();
    let (lo, hi) = (t[0], t[t.len() - 1]);
    let centre = 0.5 * (lo + hi);
    let half_width = 0.5 * (hi - lo);
    let design = DMatrix::from_fn(t.len(), degree + 1, |r, c| libm::pow((t[r] - centre) / half_width, c as f64));
    let beta = least_squares(design, DVector::from_column_slice(&series.values), "polynomial fit")?;
    Ok(Polynomial { centre, half_width, coefficients: beta.iter().copied().collect() })
}

pub fn fit_polynomial(series: &Series, degree: usize) -> Result<RegressionCurve> {
    let p = polynomial_model(series, degree)?;
    let t = series.scaled();
    Ok(RegressionCurve {
        cycles: series.cycles.clone(),
        values: t.iter().map(|&x| p.value(x)).collect(),
        gradients: t.iter().map(|&x| p.derivative(x)).collect(),
    })
}

/// Continuous piecewise-linear function in scaled cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    /// Interior breakpoints, increasing.
    pub knots: Vec<f64>,
    /// `(intercept, slope)` per segment; `knots.len() + 1` entries.
    pub segments: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Segment owning `t`; a point on a breakpoint belongs to the left segment.
    pub fn segment_of(&self, t: f64) -> usize {
        self.knots.partition_point(|&k| k < t)
    }

    pub fn value(&self, t: f64) -> f64 {
        let (a, b) = self.segments[self.segment_of(t)];
        a + b * t
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.segments[self.segment_of(t)].1
    }
}

/// Interior breakpoints for `pieces` regular intervals over `[lo, hi]`,
/// shifted right by `offset` intervals and clipped to the open range.
pub fn breakpoints(lo: f64, hi: f64, pieces: usize, offset: f64) -> Vec<f64> {
    let interval = (hi - lo) / pieces as f64;
    // filter on the grid position, not the rounded knot, so no knot lands an ulp from an end
    (0..=pieces)
        .map(|j| j as f64 + offset)
        .filter(|&u| u > 0.0 && u < pieces as f64)
        .map(|u| lo + u * interval)
        .collect()
}

pub fn piecewise_model(series: &Series, pieces: usize, offset: f64) -> Result<PiecewiseLinear> {
    if pieces == 0 {
        return Err(Error::Analysis("piecewise fit needs at least one piece".into()));
    }
    if !(0.0..1.0).contains(&offset) {
        return Err(Error::Analysis(format!("breakpoint offset must be in [0, 1), got {offset}")));
    }
    if series.len() < pieces + 1 {
        return Err(Error::Analysis(format!(
            "{pieces}-piece fit needs at least {} points, got {}",
            pieces + 1,
            series.len()
        )));
    }
    let t = series.scaled();
    let (lo, hi) = (t[0], t[t.len() - 1]);
    let knots = breakpoints(lo, hi, pieces, offset);

    let mut counts = alloc::vec![0usize; knots.len() + 1];
    for &x in &t {
        counts[knots.partition_point(|&k| k < x)] += 1;
    }
    if let Some(s) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Analysis(format!(
            "segment {s} of the {pieces}-piece fit (offset {offset}) contains no data"
        )));
    }

    let cols = knots.len() + 2;
    let design = DMatrix::from_fn(t.len(), cols, |r, c| match c {
        0 => 1.0,
        1 => t[r] - lo,
        _ => (t[r] - knots[c - 2]).max(0.0),
    });
    let beta = least_squares(design, DVector::from_column_slice(&series.values), "piecewise fit")?;

    let mut segments = Vec::with_capacity(knots.len() + 1);
    let mut slope = beta[1];
    let mut intercept = beta[0] - beta[1] * lo;
    segments.push((intercept, slope));
    for (j, &k) in knots.iter().enumerate() {
        let extra = beta[j + 2];
        slope += extra;
        intercept -= extra * k;
        segments.push((intercept, slope));
    }
    Ok(PiecewiseLinear { knots, segments })
}

pub fn fit_piecewise(series: &Series, pieces: usize, offset: f64) -> Result<RegressionCurve> {
    let m = piecewise_model(series, pieces, offset)?;
    let t = series.scaled();
    Ok(RegressionCurve {
        cycles: series.cycles.clone(),
        values: t.iter().map(|&x| m.value(x)).collect(),
        gradients: t.iter().map(|&x| m.slope(x)).collect(),
    })
}

/// The five constituent fits of [`fit_averaged_piecewise`].
pub fn averaged_constituents(series: &Series) -> Result<Vec<RegressionCurve>> {
    AVERAGED_OFFSETS
        .iter()
        .map(|&o| fit_piecewise(series, AVERAGED_PIECES, o))
        .collect()
}

/// Pointwise mean of curves sharing one grid, summed in order.
pub fn mean_curve(parts: &[RegressionCurve]) -> Result<RegressionCurve> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Analysis("no curves to average".into()))?;
    if parts.iter().any(|p| p.cycles != first.cycles) {
        return Err(Error::Analysis("curves to average have different grids".into()));
    }
    let count = parts.len() as f64;
    let n = first.cycles.len();
    let mean = |pick: fn(&RegressionCurve) -> &Vec<f64>| -> Vec<f64> {
        (0..n)
            .map(|i| parts.iter().fold(0.0, |acc, p| acc + pick(p)[i]) / count)
            .collect()
    };
    Ok(RegressionCurve {
        cycles: first.cycles.clone(),
        values: mean(|p| &p.values),
        gradients: mean(|p| &p.gradients),
    })
}

pub fn fit_averaged_piecewise(series: &Series) -> Result<RegressionCurve> {
    mean_curve(&averaged_constituents(series)?)
}

/// First grid cycle whose gradient is at or below `threshold`.
pub fn initiation_point(curve: &RegressionCurve, threshold: f64) -> Option<f64> {
    curve
        .gradients
        .iter()
        .position(|&g| g <= threshold)
        .map(|i| curve.cycles[i])
}

/// `none` or the cycle number.
pub fn format_cycle(c: Option<f64>) -> String {
    match c {
        Some(c) => format!("{c}"),
        None => String::from("none"),
    }
}
