use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use super::spec::{ExperimentSpec, TvChoice};
use crate::error::{LabError, Result};
use crate::metrics::{
    self, fit_rate, fit_rate_dropping_smallest, tv_cells_times_isotropic, tv_gaussians_1d,
    tv_isotropic_gaussians, CellMasses, GridSpec, RateFit,
};
use crate::rng;
use crate::samplers::{run_reverse, DesignTag, GaussianOracle, SamplerCoefficients};
use crate::samples::SampleMatrix;
use crate::schedule::Schedule;
use crate::scores::{
    estimate_eps_score, ExactProvider, PerturbationKind, PerturbationSpec, PerturbedProvider,
    ScoreProvider,
};
use crate::targets::{
    intrinsic_dimension_estimate, marginal_log_density, sample_forward, BaseTarget, Target,
    TargetModel,
};

/// Minimum `r^2` below which rate fits drop their smallest-`T` point once.
pub const FIT_MIN_R_SQUARED: f64 = 0.98;

const SALT_FLOOR: u64 = 0xF1_00;
const SALT_EPS: u64 = 0xE5_00;
const SALT_SLICED: u64 = 0x51_00;

/// One measured `(T, design, eps)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "T")]
    pub steps: usize,
    pub d: usize,
    pub k: usize,
    pub design: DesignTag,
    pub eps_score: f64,
    pub tv: f64,
    pub tv_stderr: f64,
    pub noise_floor: f64,
    pub seed: u64,
    pub runtime_s: f64,
    /// Names of schedule checks that failed for this `T`.
    pub schedule_failures: Vec<String>,
    /// Partition TV of the subspace coordinates alone.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_projected: Option<f64>,
    /// Exact TV of the Gaussian factor normal to the subspace.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_normal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    #[serde(rename = "T")]
    pub steps: usize,
    pub design: DesignTag,
    pub eps: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateScanResult {
    pub experiment_id: String,
    pub rows: Vec<ScanRow>,
    pub failures: Vec<RowFailure>,
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
    pub spec_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessPoint {
    pub eps: f64,
    pub tv: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreErrorScanResult {
    pub experiment_id: String,
    pub rows: Vec<ScanRow>,
    pub failures: Vec<RowFailure>,
    pub excess: Vec<ExcessPoint>,
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
    pub spec_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFit {
    pub k: usize,
    pub design: DesignTag,
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowdimScanResult {
    pub experiment_id: String,
    pub ambient_dim: usize,
    pub rows: Vec<ScanRow>,
    pub failures: Vec<RowFailure>,
    pub fits: Vec<DesignFit>,
    /// Covering-number dimension estimate of each target's support.
    pub support_dimension: Vec<(usize, f64)>,
    pub spec_hash: String,
}

impl LowdimScanResult {
    pub fn fit_for(&self, k: usize, design: DesignTag) -> Option<&RateFit> {
        self.fits
            .iter()
            .find(|f| f.k == k && f.design == design)
            .and_then(|f| f.fit.as_ref())
    }

    pub fn row(&self, k: usize, design: DesignTag, steps: usize) -> Option<&ScanRow> {
        self.rows
            .iter()
            .find(|r| r.k == k && r.design == design && r.steps == steps)
    }
}

/// Seed of the row at `T`; rows never share or depend on other rows' streams.
pub fn row_seed(seed: u64, steps: usize) -> u64 {
    rng::mix(seed, steps as u64)
}

struct Measured {
    tv: f64,
    tv_stderr: f64,
    noise_floor: f64,
    eps_score: f64,
    tv_projected: Option<f64>,
    tv_normal: Option<f64>,
}

struct Cell<'a> {
    spec: &'a ExperimentSpec,
    target: &'a Target,
    method: TvChoice,
    design: DesignTag,
    perturbation: Option<PerturbationSpec>,
}

impl Cell<'_> {
    fn run(&self, steps: usize) -> std::result::Result<ScanRow, RowFailure> {
        let fail = |e: LabError| RowFailure {
            steps,
            design: self.design,
            eps: self.perturbation.as_ref().map(|p| p.magnitude),
            error: e.to_string(),
        };
        let start = Instant::now();
        let schedule =
            Schedule::new(steps, self.spec.schedule.c0, self.spec.schedule.c1).map_err(fail)?;
        let schedule_failures = schedule
            .validity_report()
            .failed()
            .map(|c| c.name.to_string())
            .collect();
        let seed = row_seed(self.spec.seed, steps);
        let m = self.measure(&schedule, seed).map_err(fail)?;
        Ok(ScanRow {
            steps,
            d: self.target.dim(),
            k: intrinsic_dim(self.target),
            design: self.design,
            eps_score: m.eps_score,
            tv: m.tv,
            tv_stderr: m.tv_stderr,
            noise_floor: m.noise_floor,
            seed: self.spec.seed,
            runtime_s: if self.spec.record_runtime {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
            schedule_failures,
            tv_projected: m.tv_projected,
            tv_normal: m.tv_normal,
        })
    }

    fn measure(&self, schedule: &Schedule, seed: u64) -> Result<Measured> {
        let coeffs = SamplerCoefficients::for_design(self.design, schedule)?;
        if self.method == TvChoice::Oracle {
            return self.measure_oracle(schedule, &coeffs);
        }
        self.spec.check_trajectories()?;
        let exact = ExactProvider::new(self.target, schedule)?;
        let provider: Box<dyn ScoreProvider> = match &self.perturbation {
            Some(p) => Box::new(PerturbedProvider::new(exact, p.clone())?),
            None => Box::new(exact),
        };
        let eps_score = match &self.perturbation {
            None => 0.0,
            Some(p) if p.kind == PerturbationKind::ConstantBias && p.step_magnitudes.is_none() => {
                p.magnitude
            }
            Some(_) => {
                estimate_eps_score(
                    &provider,
                    self.target,
                    schedule,
                    self.spec.eps_draws,
                    rng::mix(seed, SALT_EPS),
                )?
                .value
            }
        };
        let n = self.spec.trajectories;
        let run = run_reverse(&provider, schedule, &coeffs, n, seed)?;
        let floor_seed = rng::mix(seed, SALT_FLOOR);
        let mut m = match self.method {
            TvChoice::Grid => {
                let grid = self.grid(schedule)?;
                let density = |x: &[f64]| {
                    marginal_log_density(self.target, schedule, 1, x).unwrap_or(f64::NEG_INFINITY)
                };
                let est = metrics::tv_grid(&run.samples, &density, &grid)?;
                let reference = sample_forward(self.target, schedule, 1, n, floor_seed)?;
                let floor = metrics::tv_grid(&reference, &density, &grid)?;
                Measured {
                    tv: est.value,
                    tv_stderr: est.stderr.unwrap_or(0.0),
                    noise_floor: floor.value,
                    eps_score: 0.0,
                    tv_projected: None,
                    tv_normal: None,
                }
            }
            TvChoice::Partition => {
                let part = AtomPartition::new(self.target, schedule, self.spec.tv.cell_radius)?;
                let (combined, projected, normal, stderr) = part.tv(&run.samples, &coeffs)?;
                let floor = part.self_tv(n, floor_seed)?;
                Measured {
                    tv: combined,
                    tv_stderr: stderr,
                    noise_floor: floor,
                    eps_score: 0.0,
                    tv_projected: Some(projected),
                    tv_normal: Some(normal),
                }
            }
            TvChoice::Sliced => {
                let dirs = self.spec.tv.directions;
                let reference = sample_forward(self.target, schedule, 1, n, floor_seed)?;
                let est = metrics::tv_sliced(
                    &run.samples,
                    &reference,
                    dirs,
                    rng::mix(seed, SALT_SLICED),
                )?;
                let second = sample_forward(self.target, schedule, 1, n, rng::mix(floor_seed, 1))?;
                let floor =
                    metrics::tv_sliced(&second, &reference, dirs, rng::mix(seed, SALT_SLICED))?;
                Measured {
                    tv: est.value,
                    tv_stderr: 0.0,
                    noise_floor: floor.value,
                    eps_score: 0.0,
                    tv_projected: None,
                    tv_normal: None,
                }
            }
            TvChoice::Oracle | TvChoice::Auto => unreachable!("resolved before measuring"),
        };
        m.eps_score = eps_score;
        Ok(m)
    }

    fn grid(&self, schedule: &Schedule) -> Result<GridSpec> {
        let d = self.target.dim();
        if d > 2 {
            return Err(LabError::Config(format!(
                "grid TV needs d <= 2, got d = {d}; use the sliced diagnostic or an atom partition"
            )));
        }
        let ab = schedule.alpha_bar(1);
        let (mean0, var0) = self.target.moments();
        let mean: Vec<f64> = mean0.iter().map(|m| ab.sqrt() * m).collect();
        let sd: Vec<f64> = var0.iter().map(|v| (ab * v + 1.0 - ab).sqrt()).collect();
        let auto = GridSpec::around(&mean, &sd, self.spec.trajectories)?;
        match self.spec.tv.bin_width {
            Some(w) => GridSpec::new(auto.lower, auto.upper, w),
            None => Ok(auto),
        }
    }

    fn measure_oracle(
        &self,
        schedule: &Schedule,
        coeffs: &SamplerCoefficients,
    ) -> Result<Measured> {
        let (dim, variance, mean) = self.spec.target.gaussian_params().ok_or_else(|| {
            LabError::Config("the Gaussian oracle needs a `gaussian` target family".into())
        })?;
        let mut oracle = GaussianOracle::centered(variance).with_mean(mean);
        let mut bias = vec![0.0; dim];
        let mut eps_score = 0.0;
        match &self.perturbation {
            None => {}
            Some(p) if p.step_magnitudes.is_some() => {
                return Err(LabError::Config(
                    "the oracle supports constant perturbations only".into(),
                ))
            }
            Some(p) => match p.kind {
                PerturbationKind::ConstantBias => {
                    let u = p.direction(dim);
                    bias = u.iter().map(|ui| p.magnitude * ui).collect();
                    eps_score = p.magnitude;
                }
                PerturbationKind::Scaled => {
                    oracle = oracle.with_scale(p.magnitude);
                    // s* = -(x - sqrt(ab) mu)/v*, so E|s - s*|^2 = rho^2 d / v*
                    let t_f = schedule.steps() as f64;
                    let avg: f64 = (1..=schedule.steps())
                        .map(|t| 1.0 / oracle.forward(schedule, t).1)
                        .sum::<f64>()
                        / t_f;
                    eps_score = p.magnitude * (dim as f64 * avg).sqrt();
                }
            },
        }
        let (mx, vx) = oracle.forward(schedule, 1);
        let tv = if dim == 1 {
            let (my, vy) = oracle.with_bias(bias[0]).run(schedule, coeffs)?;
            tv_gaussians_1d(mx, vx, my, vy)?
        } else {
            if mean != 0.0 || bias.iter().any(|b| *b != 0.0) {
                return Err(LabError::Config(
                    "oracle TV in d > 1 needs a centered target and no bias".into(),
                ));
            }
            let (_, vy) = oracle.run(schedule, coeffs)?;
            tv_isotropic_gaussians(dim, vx, vy)?
        };
        Ok(Measured {
            tv,
            tv_stderr: 0.0,
            noise_floor: 0.0,
            eps_score,
            tv_projected: None,
            tv_normal: None,
        })
    }
}

fn intrinsic_dim(target: &Target) -> usize {
    match target.model() {
        TargetModel::Embedded(e) => e.intrinsic_dim(),
        _ => target.dim(),
    }
}

fn is_atomic(target: &Target) -> bool {
    match target.model() {
        TargetModel::PointMasses(_) => true,
        TargetModel::Embedded(e) => matches!(e.base(), BaseTarget::PointMasses(_)),
        TargetModel::GaussianMixture(_) => false,
    }
}

fn resolve_method(spec: &ExperimentSpec, target: &Target) -> Result<TvChoice> {
    Ok(match spec.tv.method {
        TvChoice::Auto => {
            if spec.target.gaussian_params().is_some() {
                TvChoice::Oracle
            } else if is_atomic(target) {
                TvChoice::Partition
            } else if target.dim() <= 2 {
                TvChoice::Grid
            } else {
                return Err(LabError::Config(format!(
                    "no acceptance-grade TV for a d = {} mixture; choose `sliced` explicitly",
                    target.dim()
                )));
            }
        }
        TvChoice::Partition if !is_atomic(target) => {
            return Err(LabError::Config(
                "the atom partition needs a point-mass target".into(),
            ))
        }
        other => other,
    })
}

/// Cells around each forward-noised atom in subspace coordinates plus a
/// leftover cell, combined with the exact Gaussian factor normal to the
/// subspace.
struct AtomPartition {
    /// `d x k`; identity for non-embedded targets.
    embed: DMatrix<f64>,
    offset: DVector<f64>,
    centers: Vec<DVector<f64>>,
    weights: Vec<f64>,
    radius: f64,
    cell_mass: f64,
    noise_var: f64,
    base: Target,
    schedule: Schedule,
}

impl AtomPartition {
    fn new(target: &Target, schedule: &Schedule, cell_radius: f64) -> Result<Self> {
        let (embed, offset, atoms, base) = match target.model() {
            TargetModel::PointMasses(p) => (
                DMatrix::identity(p.dim(), p.dim()),
                DVector::zeros(p.dim()),
                p.atoms().to_vec(),
                target.clone(),
            ),
            TargetModel::Embedded(e) => match e.base() {
                BaseTarget::PointMasses(p) => {
                    let offset = e.offset().clone();
                    let perp = &offset - e.embed() * (e.embed().transpose() * &offset);
                    if perp.norm() > 1e-12 {
                        return Err(LabError::Config(
                            "the atom partition needs an offset inside the embedded subspace"
                                .into(),
                        ));
                    }
                    (
                        e.embed().clone(),
                        offset,
                        p.atoms().to_vec(),
                        Target::from(e.base().clone()),
                    )
                }
                BaseTarget::Gaussian(_) => {
                    return Err(LabError::Config(
                        "the atom partition needs a point-mass base".into(),
                    ))
                }
            },
            TargetModel::GaussianMixture(_) => {
                return Err(LabError::Config(
                    "the atom partition needs a point-mass target".into(),
                ))
            }
        };
        if !(cell_radius > 0.0) {
            return Err(LabError::Config("cell radius must be positive".into()));
        }
        let ab = schedule.alpha_bar(1);
        let noise_var = 1.0 - ab;
        let radius = cell_radius * noise_var.sqrt();
        let centers: Vec<DVector<f64>> = atoms.iter().map(|a| &a.location * ab.sqrt()).collect();
        for i in 0..centers.len() {
            for j in 0..i {
                if (&centers[i] - &centers[j]).norm() <= 2.0 * radius {
                    return Err(LabError::Config(format!(
                        "atoms {j} and {i} are closer than two cell radii at T = {}",
                        schedule.steps()
                    )));
                }
            }
        }
        let k = embed.ncols() as f64;
        Ok(Self {
            cell_mass: gamma_lr(0.5 * k, 0.5 * cell_radius * cell_radius),
            weights: atoms.iter().map(|a| a.weight).collect(),
            embed,
            offset,
            centers,
            radius,
            noise_var,
            base,
            schedule: schedule.clone(),
        })
    }

    fn masses(&self, along: impl Iterator<Item = DVector<f64>>, n: usize) -> CellMasses {
        let cells = self.centers.len();
        let mut counts = vec![0usize; cells + 1];
        for z in along {
            let hit = self
                .centers
                .iter()
                .position(|c| (&z - c).norm() <= self.radius);
            counts[hit.unwrap_or(cells)] += 1;
        }
        let nf = n as f64;
        let mut analytic: Vec<f64> = self.weights.iter().map(|w| w * self.cell_mass).collect();
        analytic.push((1.0 - analytic.iter().sum::<f64>()).max(0.0));
        CellMasses {
            analytic,
            empirical: counts.iter().map(|&c| c as f64 / nf).collect(),
            analytic_outside: 0.0,
            empirical_outside: 0.0,
            n,
        }
    }

    fn project(&self, samples: &SampleMatrix) -> Vec<DVector<f64>> {
        let shift = &self.offset * self.schedule.alpha_bar(1).sqrt();
        samples
            .iter_rows()
            .map(|row| self.embed.transpose() * (DVector::from_column_slice(row) - &shift))
            .collect()
    }

    /// `(combined, projected, normal, stderr)`.
    fn tv(
        &self,
        samples: &SampleMatrix,
        coeffs: &SamplerCoefficients,
    ) -> Result<(f64, f64, f64, f64)> {
        let masses = self.masses(self.project(samples).into_iter(), samples.rows());
        let normal_dim = self.embed.nrows() - self.embed.ncols();
        let (_, normal_var) = GaussianOracle::centered(0.0).run(&self.schedule, coeffs)?;
        let normal = tv_isotropic_gaussians(normal_dim, self.noise_var, normal_var)?;
        let combined = tv_cells_times_isotropic(
            &masses.analytic,
            &masses.empirical,
            normal_dim,
            self.noise_var,
            normal_var,
        )?;
        Ok((combined, masses.tv(), normal, masses.stderr()))
    }

    /// Partition TV of exact `X_1` draws against the analytic cell masses.
    fn self_tv(&self, n: usize, seed: u64) -> Result<f64> {
        let reference = sample_forward(&self.base, &self.schedule, 1, n, seed)?;
        let along = reference.iter_rows().map(DVector::from_column_slice);
        Ok(self.masses(along, n).tv())
    }
}

fn fit_or_error(points: &[(f64, f64)], drop_smallest: bool) -> (Option<RateFit>, Option<String>) {
    let fit = if drop_smallest {
        fit_rate_dropping_smallest(points, FIT_MIN_R_SQUARED)
    } else {
        fit_rate(points)
    };
    match fit {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn rate_target(spec: &ExperimentSpec) -> Result<Target> {
    let k = spec.k_grid.first().copied().or(spec.target.native_k());
    spec.target.build(k, spec.ambient_dim)
}

/// TV against the exact `X_1` law for every `T` in the grid, then a log-log
/// fit of TV against `T`.
pub fn run_rate_scan(spec: &ExperimentSpec) -> Result<RateScanResult> {
    spec.check_t_grid(3)?;
    let target = rate_target(spec)?;
    let method = resolve_method(spec, &target)?;
    let cell = Cell {
        spec,
        target: &target,
        method,
        design: spec.design,
        perturbation: spec.perturbation.clone(),
    };
    let (rows, failures) = collect(spec.t_grid.iter().map(|&t| cell.run(t)));
    if rows.len() < 3 {
        return Err(scan_failed(rows.len(), &failures));
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.steps as f64, r.tv)).collect();
    let (fit, fit_error) = fit_or_error(&points, true);
    Ok(RateScanResult {
        experiment_id: spec.experiment_id.clone(),
        rows,
        failures,
        fit,
        fit_error,
        spec_hash: spec.content_hash(),
    })
}

/// TV at a fixed `T` for each perturbation magnitude; the excess over the
/// unperturbed run is fitted against the magnitude.
pub fn run_score_error_scan(spec: &ExperimentSpec) -> Result<ScoreErrorScanResult> {
    if spec.t_grid.len() != 1 {
        return Err(LabError::Config(format!(
            "a score-error scan runs at one T, got {} values",
            spec.t_grid.len()
        )));
    }
    if !spec.eps_grid.contains(&0.0) {
        return Err(LabError::Config("eps grid must include 0".into()));
    }
    if spec.eps_grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(LabError::Config("eps values must be non-negative".into()));
    }
    let steps = spec.t_grid[0];
    let target = rate_target(spec)?;
    let method = resolve_method(spec, &target)?;
    let template = spec
        .perturbation
        .clone()
        .unwrap_or_else(|| PerturbationSpec::constant_bias(0.0, 0));
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut measured = Vec::new();
    for &eps in &spec.eps_grid {
        let mut p = template.clone();
        p.magnitude = eps;
        let cell = Cell {
            spec,
            target: &target,
            method,
            design: spec.design,
            perturbation: Some(p),
        };
        match cell.run(steps) {
            Ok(r) => {
                measured.push((eps, r.tv));
                rows.push(r);
            }
            Err(f) => failures.push(f),
        }
    }
    let baseline = measured
        .iter()
        .find(|(eps, _)| *eps == 0.0)
        .map(|&(_, tv)| tv)
        .ok_or_else(|| LabError::Config("the eps = 0 row failed".into()))?;
    let excess: Vec<ExcessPoint> = measured
        .iter()
        .map(|&(eps, tv)| ExcessPoint {
            eps,
            tv,
            excess: tv - baseline,
        })
        .collect();
    let points: Vec<(f64, f64)> = excess
        .iter()
        .filter(|p| p.eps > 0.0)
        .map(|p| (p.eps, p.excess))
        .collect();
    let (fit, fit_error) = fit_or_error(&points, false);
    Ok(ScoreErrorScanResult {
        experiment_id: spec.experiment_id.clone(),
        rows,
        failures,
        excess,
        fit,
        fit_error,
        spec_hash: spec.content_hash(),
    })
}

/// Rate scans of both DDPM designs on embedded point-mass targets for every
/// intrinsic dimension in the grid.
pub fn run_lowdim_scan(spec: &ExperimentSpec) -> Result<LowdimScanResult> {
    spec.check_t_grid(3)?;
    let ambient = spec
        .ambient_dim
        .ok_or_else(|| LabError::Config("a low-dimensional scan needs ambient_dim".into()))?;
    let k_grid: Vec<usize> = if spec.k_grid.is_empty() {
        spec.target.native_k().into_iter().collect()
    } else {
        spec.k_grid.clone()
    };
    if k_grid.is_empty() {
        return Err(LabError::Config(
            "a low-dimensional scan needs k_grid".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut fits = Vec::new();
    let mut support_dimension = Vec::new();
    for &k in &k_grid {
        let target = spec.target.build(Some(k), Some(ambient))?;
        if !is_atomic(&target) {
            return Err(LabError::Config(
                "a low-dimensional scan needs a point-mass family".into(),
            ));
        }
        support_dimension.push((k, support_estimate(&target)?));
        for design in [DesignTag::DdpmStandard, DesignTag::DdpmLowdim] {
            let cell = Cell {
                spec,
                target: &target,
                method: TvChoice::Partition,
                design,
                perturbation: spec.perturbation.clone(),
            };
            let (cell_rows, cell_failures) = collect(spec.t_grid.iter().map(|&t| cell.run(t)));
            let points: Vec<(f64, f64)> =
                cell_rows.iter().map(|r| (r.steps as f64, r.tv)).collect();
            let (fit, fit_error) = fit_or_error(&points, true);
            fits.push(DesignFit {
                k,
                design,
                fit,
                fit_error,
            });
            rows.extend(cell_rows);
            failures.extend(cell_failures);
        }
    }
    Ok(LowdimScanResult {
        experiment_id: spec.experiment_id.clone(),
        ambient_dim: ambient,
        rows,
        failures,
        fits,
        support_dimension,
        spec_hash: spec.content_hash(),
    })
}

fn support_estimate(target: &Target) -> Result<f64> {
    let points = match target.model() {
        TargetModel::PointMasses(p) => p.locations(),
        TargetModel::Embedded(e) => match e.base() {
            BaseTarget::PointMasses(p) => {
                let base = p.locations();
                let mut out = SampleMatrix::zeros(base.rows(), e.ambient_dim());
                for i in 0..base.rows() {
                    let x = e.offset() + e.embed() * DVector::from_column_slice(base.row(i));
                    out.row_mut(i).copy_from_slice(x.as_slice());
                }
                out
            }
            BaseTarget::Gaussian(_) => unreachable!("checked atomic"),
        },
        TargetModel::GaussianMixture(_) => unreachable!("checked atomic"),
    };
    intrinsic_dimension_estimate(&points, &[0.4, 0.2, 0.1, 0.05])
}

fn collect(
    outcomes: impl Iterator<Item = std::result::Result<ScanRow, RowFailure>>,
) -> (Vec<ScanRow>, Vec<RowFailure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(f) => failures.push(f),
        }
    }
    (rows, failures)
}

fn scan_failed(survivors: usize, failures: &[RowFailure]) -> LabError {
    let detail: Vec<String> = failures
        .iter()
        .map(|f| format!("T={}: {}", f.steps, f.error))
        .collect();
    LabError::Config(format!(
        "only {survivors} rows survived (need 3): {}",
        detail.join("; ")
    ))
}
