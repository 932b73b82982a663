//! Total-variation distances: exact Gaussian oracles and histogram estimators.

use libm::erf;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{LabError, Result};
use crate::rng::{self, Domain};
use crate::samples::SampleMatrix;

/// Maximum analytic mass a grid may leave uncovered.
pub const GRID_COVERAGE_TOL: f64 = 1e-4;
/// Per-cell convergence target of the midpoint rule.
pub const CELL_INTEGRAL_TOL: f64 = 1e-8;
const MAX_SUBDIVISIONS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvMethod {
    ExactGaussian1d,
    ExactIsotropic,
    Grid1d,
    Grid2d,
    Sliced,
    Partition,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub bin_width: Option<f64>,
    /// `(lower, upper)` per axis.
    pub extent: Vec<(f64, f64)>,
    pub cells: usize,
    pub slices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub value: f64,
    pub method: TvMethod,
    pub resolution: Resolution,
    pub stderr: Option<f64>,
}

impl TvEstimate {
    fn exact(value: f64, method: TvMethod) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            method,
            resolution: Resolution::default(),
            stderr: None,
        }
    }
}

#[inline]
fn std_normal_cdf_diff(lo: f64, hi: f64) -> f64 {
    0.5 * (erf(hi / std::f64::consts::SQRT_2) - erf(lo / std::f64::consts::SQRT_2))
}

/// Exact `TV(N(m1, v1), N(m2, v2))` from the crossing points of the densities.
pub fn tv_gaussians_1d(m1: f64, v1: f64, m2: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "variances must be positive, got {v1} and {v2}"
        )));
    }
    if v1 == v2 {
        let shift = (m1 - m2).abs();
        return Ok(erf(shift / (2.0 * (2.0 * v1).sqrt())));
    }
    // log p1 - log p2 = a x^2 + b x + c
    let a = 0.5 / v2 - 0.5 / v1;
    let b = m1 / v1 - m2 / v2;
    let c = 0.5 * m2 * m2 / v2 - 0.5 * m1 * m1 / v1 + 0.5 * (v2 / v1).ln();
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sign * disc.sqrt());
    let (mut r1, mut r2) = if q == 0.0 {
        let r = -b / (2.0 * a);
        (r, r)
    } else {
        (q / a, c / q)
    };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    let (s1, s2) = (v1.sqrt(), v2.sqrt());
    let p1 = std_normal_cdf_diff((r1 - m1) / s1, (r2 - m1) / s1);
    let p2 = std_normal_cdf_diff((r1 - m2) / s2, (r2 - m2) / s2);
    Ok((p1 - p2).abs().min(1.0))
}

/// Exact TV between `N(0, v1 I_dim)` and `N(0, v2 I_dim)` via the chi-square
/// law of the squared radius; the densities cross on a single sphere.
pub fn tv_isotropic_gaussians(dim: usize, v1: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "variances must be positive, got {v1} and {v2}"
        )));
    }
    if dim == 0 || v1 == v2 {
        return Ok(0.0);
    }
    let k = dim as f64;
    let r2 = k * (v2 / v1).ln() / (1.0 / v1 - 1.0 / v2);
    let f1 = gamma_lr(0.5 * k, 0.5 * r2 / v1);
    let f2 = gamma_lr(0.5 * k, 0.5 * r2 / v2);
    Ok((f1 - f2).abs().min(1.0))
}

/// TV between `P = A (x) N(0, v_ref I_dim)` and `Q = B (x) N(0, v_test I_dim)`
/// where `A`, `B` are discrete laws over the same cells (analytic masses and
/// empirical frequencies). Within a cell the radial likelihood ratio is
/// monotone, so each cell contributes through a single crossing radius.
pub fn tv_cells_times_isotropic(
    analytic: &[f64],
    empirical: &[f64],
    dim: usize,
    v_ref: f64,
    v_test: f64,
) -> Result<f64> {
    if analytic.len() != empirical.len() {
        return Err(LabError::DimensionMismatch {
            expected: analytic.len(),
            got: empirical.len(),
        });
    }
    if !(v_ref > 0.0 && v_test > 0.0) {
        return Err(LabError::InvalidArgument(
            "variances must be positive".into(),
        ));
    }
    let k = dim as f64;
    let mut total = 0.0;
    for (&a, &b) in analytic.iter().zip(empirical) {
        if a <= 0.0 || b <= 0.0 || dim == 0 || v_ref == v_test {
            total += (a - b).abs();
            continue;
        }
        // a f(r) = b g(r) with r the squared radius
        let slope = 0.5 / v_ref - 0.5 / v_test;
        let r_star = ((a / b).ln() + 0.5 * k * (v_test / v_ref).ln()) / slope;
        if !(r_star > 0.0) || !r_star.is_finite() {
            total += (a - b).abs();
            continue;
        }
        let fa = gamma_lr(0.5 * k, 0.5 * r_star / v_ref);
        let fb = gamma_lr(0.5 * k, 0.5 * r_star / v_test);
        total += (a * fa - b * fb).abs() + (a * (1.0 - fa) - b * (1.0 - fb)).abs();
    }
    Ok((0.5 * total).min(1.0))
}

/// Axis-aligned histogram grid in one or two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub bin_width: f64,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, bin_width: f64) -> Result<Self> {
        if lower.is_empty() || lower.len() > 2 || lower.len() != upper.len() {
            return Err(LabError::InvalidArgument(
                "grid must be 1- or 2-dimensional".into(),
            ));
        }
        if !(bin_width > 0.0) || lower.iter().zip(&upper).any(|(l, u)| !(u > l)) {
            return Err(LabError::InvalidArgument(
                "grid extent or bin width is degenerate".into(),
            ));
        }
        Ok(Self {
            lower,
            upper,
            bin_width,
        })
    }

    /// `mean +- 8 sd` per axis, bin width `min(sd)/5` widened if needed so
    /// that the cells inside `mean +- 2 sd` expect at least 20 samples each.
    pub fn around(mean: &[f64], sd: &[f64], n: usize) -> Result<Self> {
        let dim = mean.len();
        let min_sd = sd.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut width = min_sd / 5.0;
        // central box of side 4 sd carries ~0.95^dim of the mass
        let central_volume: f64 = sd.iter().map(|s| 4.0 * s).product();
        let central_mass = 0.95_f64.powi(dim as i32);
        let min_width = (20.0 * central_volume / (central_mass * n as f64)).powf(1.0 / dim as f64);
        if width < min_width {
            width = min_width;
        }
        Self::new(
            mean.iter().zip(sd).map(|(m, s)| m - 8.0 * s).collect(),
            mean.iter().zip(sd).map(|(m, s)| m + 8.0 * s).collect(),
            width,
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn counts(&self) -> Vec<usize> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| ((u - l) / self.bin_width).ceil().max(1.0) as usize)
            .collect()
    }

    fn extent(&self) -> Vec<(f64, f64)> {
        let counts = self.counts();
        self.lower
            .iter()
            .zip(&counts)
            .map(|(&l, &c)| (l, l + c as f64 * self.bin_width))
            .collect()
    }

    fn cell_index(&self, x: &[f64], counts: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for axis in 0..self.dim() {
            let pos = ((x[axis] - self.lower[axis]) / self.bin_width).floor();
            if !(pos >= 0.0) || pos as usize >= counts[axis] {
                return None;
            }
            idx = idx * counts[axis] + pos as usize;
        }
        Some(idx)
    }
}

/// Midpoint-rule integral of `exp(log_density)` over a box, doubling the
/// subdivision until successive estimates agree to `CELL_INTEGRAL_TOL`.
fn integrate_cell(log_density: &(dyn Fn(&[f64]) -> f64 + Sync), lo: &[f64], width: f64) -> f64 {
    let dim = lo.len();
    let eval = |m: usize| -> f64 {
        let h = width / m as f64;
        let mut sum = 0.0;
        let mut point = vec![0.0; dim];
        let total = m.pow(dim as u32);
        for flat in 0..total {
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let i = rem % m;
                rem /= m;
                point[axis] = lo[axis] + (i as f64 + 0.5) * h;
            }
            sum += log_density(&point).exp();
        }
        sum * h.powi(dim as i32)
    };
    let mut m = 1;
    let mut prev = eval(m);
    while m < MAX_SUBDIVISIONS {
        m *= 2;
        let next = eval(m);
        if (next - prev).abs() <= CELL_INTEGRAL_TOL {
            return next;
        }
        prev = next;
    }
    prev
}

/// Analytic and empirical masses over a finite partition plus the leftover
/// region.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMasses {
    pub analytic: Vec<f64>,
    pub empirical: Vec<f64>,
    pub analytic_outside: f64,
    pub empirical_outside: f64,
    pub n: usize,
}

impl CellMasses {
    /// `1/2 sum |empirical - analytic|` over the cells, plus the analytic
    /// leftover mass and half the empirical leftover mass.
    pub fn tv(&self) -> f64 {
        let inside: f64 = self
            .analytic
            .iter()
            .zip(&self.empirical)
            .map(|(a, e)| (a - e).abs())
            .sum();
        (0.5 * (inside + self.empirical_outside) + self.analytic_outside).clamp(0.0, 1.0)
    }

    /// Binomial standard error of the estimate, from the analytic masses.
    pub fn stderr(&self) -> f64 {
        let n = self.n as f64;
        let var: f64 = self
            .analytic
            .iter()
            .chain(std::iter::once(&self.analytic_outside))
            .map(|p| p * (1.0 - p) / n)
            .sum();
        0.5 * var.sqrt()
    }
}

/// Histogram TV between samples and an analytic density on a 1- or 2-d grid.
pub fn tv_grid(
    samples: &SampleMatrix,
    log_density: &(dyn Fn(&[f64]) -> f64 + Sync),
    grid: &GridSpec,
) -> Result<TvEstimate> {
    let cells = grid_masses(samples, log_density, grid)?;
    let method = if grid.dim() == 1 {
        TvMethod::Grid1d
    } else {
        TvMethod::Grid2d
    };
    Ok(TvEstimate {
        value: cells.tv(),
        method,
        resolution: Resolution {
            bin_width: Some(grid.bin_width),
            extent: grid.extent(),
            cells: cells.analytic.len(),
            slices: None,
        },
        stderr: Some(cells.stderr()),
    })
}

/// Cell masses of a grid; fails when the grid misses more than
/// [`GRID_COVERAGE_TOL`] of the analytic mass.
pub fn grid_masses(
    samples: &SampleMatrix,
    log_density: &(dyn Fn(&[f64]) -> f64 + Sync),
    grid: &GridSpec,
) -> Result<CellMasses> {
    use rayon::prelude::*;

    if samples.cols() != grid.dim() {
        return Err(LabError::DimensionMismatch {
            expected: grid.dim(),
            got: samples.cols(),
        });
    }
    if samples.rows() == 0 {
        return Err(LabError::InvalidArgument("no samples".into()));
    }
    let counts = grid.counts();
    let total_cells: usize = counts.iter().product();
    let analytic: Vec<f64> = (0..total_cells)
        .into_par_iter()
        .map(|flat| {
            let mut lo = vec![0.0; grid.dim()];
            let mut rem = flat;
            for axis in (0..grid.dim()).rev() {
                lo[axis] = grid.lower[axis] + (rem % counts[axis]) as f64 * grid.bin_width;
                rem /= counts[axis];
            }
            integrate_cell(log_density, &lo, grid.bin_width)
        })
        .collect();
    let covered: f64 = analytic.iter().sum();
    let missing = (1.0 - covered).max(0.0);
    if missing > GRID_COVERAGE_TOL {
        return Err(LabError::GridCoverage { covered, missing });
    }
    let mut hist = vec![0usize; total_cells];
    let mut outside = 0usize;
    for row in samples.iter_rows() {
        match grid.cell_index(row, &counts) {
            Some(i) => hist[i] += 1,
            None => outside += 1,
        }
    }
    let n = samples.rows() as f64;
    Ok(CellMasses {
        analytic,
        empirical: hist.iter().map(|&c| c as f64 / n).collect(),
        analytic_outside: missing,
        empirical_outside: outside as f64 / n,
        n: samples.rows(),
    })
}

/// Histogram TV between two 1-d sample sets on a shared grid.
pub fn tv_histograms_1d(a: &[f64], b: &[f64], grid: &GridSpec) -> Result<f64> {
    if grid.dim() != 1 {
        return Err(LabError::InvalidArgument("expected a 1-d grid".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(LabError::InvalidArgument(
            "sample sets must be non-empty".into(),
        ));
    }
    let counts = grid.counts();
    let hist = |xs: &[f64]| {
        let mut h = vec![0.0; counts[0] + 1];
        let w = 1.0 / xs.len() as f64;
        for &x in xs {
            let i = grid.cell_index(&[x], &counts).unwrap_or(counts[0]);
            h[i] += w;
        }
        h
    };
    let (ha, hb) = (hist(a), hist(b));
    Ok(0.5 * ha.iter().zip(&hb).map(|(p, q)| (p - q).abs()).sum::<f64>())
}

/// Sliced diagnostic: mean 1-d histogram TV between the two sample sets over
/// random unit directions. Lower-bound flavoured; not the TV of the full law.
pub fn tv_sliced(
    samples: &SampleMatrix,
    reference: &SampleMatrix,
    directions: usize,
    seed: u64,
) -> Result<TvEstimate> {
    if samples.cols() != reference.cols() {
        return Err(LabError::DimensionMismatch {
            expected: reference.cols(),
            got: samples.cols(),
        });
    }
    if directions == 0 {
        return Err(LabError::InvalidArgument(
            "need at least one direction".into(),
        ));
    }
    let d = samples.cols();
    let mut total = 0.0;
    for j in 0..directions {
        let mut rng = rng::stream(seed, Domain::Direction, j as u64);
        let dir = unit_vector(d, &mut rng);
        let pa = samples.project(&dir);
        let pb = reference.project(&dir);
        let (mean, sd) = mean_sd(&pb);
        let grid = GridSpec::around(&[mean], &[sd.max(1e-12)], pa.len().min(pb.len()))?;
        total += tv_histograms_1d(&pa, &pb, &grid)?;
    }
    Ok(TvEstimate {
        value: total / directions as f64,
        method: TvMethod::Sliced,
        resolution: Resolution {
            slices: Some(directions),
            ..Resolution::default()
        },
        stderr: None,
    })
}

pub(crate) fn unit_vector<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Wraps the exact 1-d oracle as an estimate record.
pub fn exact_gaussian_estimate(m1: f64, v1: f64, m2: f64, v2: f64) -> Result<TvEstimate> {
    Ok(TvEstimate::exact(
        tv_gaussians_1d(m1, v1, m2, v2)?,
        TvMethod::ExactGaussian1d,
    ))
}

pub fn exact_isotropic_estimate(dim: usize, v1: f64, v2: f64) -> Result<TvEstimate> {
    Ok(TvEstimate::exact(
        tv_isotropic_gaussians(dim, v1, v2)?,
        TvMethod::ExactIsotropic,
    ))
}
