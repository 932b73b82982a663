//! Analytic data distributions with closed-form forward marginals, exact
//! scores, Jacobians of the conditional residual, and forward sampling.

mod covering;
mod def;
mod mixture;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::rng::{self, Domain};
use crate::samples::SampleMatrix;
use crate::schedule::Schedule;

pub use covering::{covering_number, intrinsic_dimension_estimate, torus_cloud};
pub use def::{AtomDef, GaussianComponentDef, TargetDef};
pub(crate) use mixture::StepMarginal;
use mixture::{symmetrize, AmbientComponent};

const WEIGHT_SUM_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureTarget {
    dim: usize,
    components: Vec<GaussianComponent>,
}

impl GaussianMixtureTarget {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| LabError::InvalidTarget("mixture has no components".into()))?;
        let dim = first.mean.len();
        if dim == 0 {
            return Err(LabError::InvalidTarget("dimension must be positive".into()));
        }
        check_weights(components.iter().map(|c| c.weight))?;
        for (i, c) in components.iter().enumerate() {
            if c.mean.len() != dim || c.cov.nrows() != dim || c.cov.ncols() != dim {
                return Err(LabError::InvalidTarget(format!(
                    "component {i} does not match dimension {dim}"
                )));
            }
            if c.mean.iter().chain(c.cov.iter()).any(|v| !v.is_finite()) {
                return Err(LabError::InvalidTarget(format!(
                    "component {i} has non-finite entries"
                )));
            }
            let scale = c.cov.amax().max(1.0);
            if (&c.cov - c.cov.transpose()).amax() > 1e-12 * scale {
                return Err(LabError::InvalidTarget(format!(
                    "covariance {i} is not symmetric"
                )));
            }
            let min_eig = c.cov.clone().symmetric_eigenvalues().min();
            if !(min_eig > 0.0) {
                return Err(LabError::InvalidTarget(format!(
                    "covariance {i} has minimum eigenvalue {min_eig}; use a point-mass target for degenerate components"
                )));
            }
        }
        Ok(Self { dim, components })
    }

    /// `N(0, variance * I_dim)`.
    pub fn isotropic(dim: usize, variance: f64) -> Result<Self> {
        Self::new(vec![GaussianComponent {
            weight: 1.0,
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * variance,
        }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Upper bound `sum_i w_i (|mu_i| + sqrt(tr Sigma_i))` on `E|X_0|`.
    pub fn first_moment_bound(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * (c.mean.norm() + c.cov.trace().sqrt()))
            .sum()
    }

    /// Mixture covariance `sum w_i (Sigma_i + mu_i mu_i^T) - mu mu^T`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mut mean = DVector::zeros(self.dim);
        let mut second = DMatrix::zeros(self.dim, self.dim);
        for c in &self.components {
            mean.axpy(c.weight, &c.mean, 1.0);
            second += (&c.cov + &c.mean * c.mean.transpose()) * c.weight;
        }
        second - &mean * mean.transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub location: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointMassMixtureTarget {
    dim: usize,
    atoms: Vec<Atom>,
}

impl PointMassMixtureTarget {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| LabError::InvalidTarget("atom list is empty".into()))?;
        let dim = first.location.len();
        if dim == 0 {
            return Err(LabError::InvalidTarget("dimension must be positive".into()));
        }
        check_weights(atoms.iter().map(|a| a.weight))?;
        for (i, a) in atoms.iter().enumerate() {
            if a.location.len() != dim {
                return Err(LabError::InvalidTarget(format!(
                    "atom {i} does not match dimension {dim}"
                )));
            }
            if a.location.iter().any(|v| !v.is_finite()) {
                return Err(LabError::InvalidTarget(format!("atom {i} is not finite")));
            }
        }
        Ok(Self { dim, atoms })
    }

    pub fn single(location: DVector<f64>) -> Result<Self> {
        Self::new(vec![Atom {
            weight: 1.0,
            location,
        }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn first_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.location.norm())
            .sum()
    }

    /// Atom locations as an `n x d` point cloud.
    pub fn locations(&self) -> SampleMatrix {
        let data = self
            .atoms
            .iter()
            .flat_map(|a| a.location.iter().copied())
            .collect();
        SampleMatrix::from_vec(self.atoms.len(), self.dim, data).expect("consistent shape")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaseTarget {
    Gaussian(GaussianMixtureTarget),
    PointMasses(PointMassMixtureTarget),
}

impl BaseTarget {
    pub fn dim(&self) -> usize {
        match self {
            BaseTarget::Gaussian(g) => g.dim(),
            BaseTarget::PointMasses(p) => p.dim(),
        }
    }
}

/// A `k`-dimensional base distribution placed in `R^d` through `x = offset + E z`
/// with orthonormal columns `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedTarget {
    base: BaseTarget,
    embed: DMatrix<f64>,
    offset: DVector<f64>,
}

impl EmbeddedTarget {
    pub fn new(base: BaseTarget, embed: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let k = base.dim();
        let d = embed.nrows();
        if embed.ncols() != k {
            return Err(LabError::InvalidTarget(format!(
                "embedding has {} columns but the base dimension is {k}",
                embed.ncols()
            )));
        }
        if d <= k {
            return Err(LabError::InvalidTarget(format!(
                "ambient dimension {d} must exceed intrinsic dimension {k}"
            )));
        }
        if offset.len() != d {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: offset.len(),
            });
        }
        let gram = embed.transpose() * &embed;
        let err = (gram - DMatrix::<f64>::identity(k, k)).amax();
        if !(err <= ORTHONORMAL_TOL) {
            return Err(LabError::InvalidTarget(format!(
                "embedding columns are not orthonormal (max deviation {err:.3e})"
            )));
        }
        Ok(Self {
            base,
            embed,
            offset,
        })
    }

    /// Embeds with a random orthonormal `d x k` matrix drawn from `seed`.
    pub fn with_random_embedding(base: BaseTarget, ambient_dim: usize, seed: u64) -> Result<Self> {
        let k = base.dim();
        let embed = random_orthonormal(ambient_dim, k, seed);
        Self::new(base, embed, DVector::zeros(ambient_dim))
    }

    pub fn base(&self) -> &BaseTarget {
        &self.base
    }

    pub fn embed(&self) -> &DMatrix<f64> {
        &self.embed
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn ambient_dim(&self) -> usize {
        self.embed.nrows()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.embed.ncols()
    }

    /// Splits `x - sqrt(ab) offset` into base coordinates `E^T(.)` and the
    /// ambient normal component `(I - E E^T)(.)`.
    pub fn split(&self, x: &[f64], alpha_bar: f64) -> (DVector<f64>, DVector<f64>) {
        let centered = DVector::from_column_slice(x) - &self.offset * alpha_bar.sqrt();
        let along = self.embed.transpose() * &centered;
        let normal = &centered - &self.embed * &along;
        (along, normal)
    }

    /// Score assembled from the base score in subspace coordinates and the
    /// Gaussian normal factor: `E s_base(E^T x) - x_perp / (1 - ab)`.
    pub fn score_via_subspace(&self, schedule: &Schedule, t: usize, x: &[f64]) -> Result<Vec<f64>> {
        schedule.check_step(t)?;
        let ab = schedule.alpha_bar(t);
        let (along, normal) = self.split(x, ab);
        let base_target = Target::from(self.base.clone());
        let base_score = score_exact(&base_target, schedule, t, along.as_slice())?;
        let lifted = &self.embed * DVector::from_vec(base_score) - normal / (1.0 - ab);
        Ok(lifted.as_slice().to_vec())
    }
}

/// Random `d x k` matrix with orthonormal columns (Gram-Schmidt on Gaussian
/// columns, re-orthogonalized once).
pub fn random_orthonormal(d: usize, k: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, Domain::Cloud, u64::MAX);
    let mut m: DMatrix<f64> = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    for j in 0..k {
        for _ in 0..2 {
            for i in 0..j {
                let proj = m.column(i).dot(&m.column(j));
                let ci = m.column(i).clone_owned();
                m.column_mut(j).axpy(-proj, &ci, 1.0);
            }
        }
        let norm = m.column(j).norm();
        m.column_mut(j).unscale_mut(norm);
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetModel {
    GaussianMixture(GaussianMixtureTarget),
    PointMasses(PointMassMixtureTarget),
    Embedded(EmbeddedTarget),
}

/// A data distribution `p_data` with its ambient-space mixture representation.
#[derive(Debug, Clone)]
pub struct Target {
    model: TargetModel,
    dim: usize,
    components: Vec<AmbientComponent>,
}

impl PartialEq for Target {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
    }
}

impl From<GaussianMixtureTarget> for Target {
    fn from(g: GaussianMixtureTarget) -> Self {
        Target::new(TargetModel::GaussianMixture(g))
    }
}

impl From<PointMassMixtureTarget> for Target {
    fn from(p: PointMassMixtureTarget) -> Self {
        Target::new(TargetModel::PointMasses(p))
    }
}

impl From<EmbeddedTarget> for Target {
    fn from(e: EmbeddedTarget) -> Self {
        Target::new(TargetModel::Embedded(e))
    }
}

impl From<BaseTarget> for Target {
    fn from(b: BaseTarget) -> Self {
        match b {
            BaseTarget::Gaussian(g) => g.into(),
            BaseTarget::PointMasses(p) => p.into(),
        }
    }
}

impl Target {
    fn new(model: TargetModel) -> Self {
        let (dim, components) = match &model {
            TargetModel::GaussianMixture(g) => (g.dim(), gaussian_components(g, None)),
            TargetModel::PointMasses(p) => (p.dim(), point_components(p, None)),
            TargetModel::Embedded(e) => {
                let map = Some((&e.embed, &e.offset));
                let comps = match &e.base {
                    BaseTarget::Gaussian(g) => gaussian_components(g, map),
                    BaseTarget::PointMasses(p) => point_components(p, map),
                };
                (e.ambient_dim(), comps)
            }
        };
        Self {
            model,
            dim,
            components,
        }
    }

    pub fn standard_gaussian(dim: usize) -> Self {
        GaussianMixtureTarget::isotropic(dim, 1.0)
            .expect("identity covariance is valid")
            .into()
    }

    pub fn model(&self) -> &TargetModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &'static str {
        match self.model {
            TargetModel::GaussianMixture(_) => "gaussian_mixture",
            TargetModel::PointMasses(_) => "point_masses",
            TargetModel::Embedded(_) => "embedded",
        }
    }

    /// `E|X_0|`: exact for point masses (embedded or not), an upper bound for
    /// Gaussian components.
    pub fn first_moment(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let spread = c.cov.as_ref().map_or(0.0, |s| s.trace().sqrt());
                c.weight * (c.mean.norm() + spread)
            })
            .sum()
    }

    /// Mean and per-coordinate variance of `X_0`.
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim;
        let mut mean = vec![0.0; d];
        let mut second = vec![0.0; d];
        for c in &self.components {
            for k in 0..d {
                let spread = c.cov.as_ref().map_or(0.0, |s| s[(k, k)]);
                mean[k] += c.weight * c.mean[k];
                second[k] += c.weight * (spread + c.mean[k] * c.mean[k]);
            }
        }
        let var = second
            .iter()
            .zip(&mean)
            .map(|(s, m)| (s - m * m).max(0.0))
            .collect();
        (mean, var)
    }

    pub(crate) fn step_marginal(&self, schedule: &Schedule, t: usize) -> Result<StepMarginal> {
        schedule.check_step(t)?;
        StepMarginal::new(&self.components, self.dim, t, schedule.alpha_bar(t))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidArgument(
                "query point is not finite".into(),
            ));
        }
        Ok(())
    }

    /// Draws one `X_0`.
    pub fn sample_data<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                chosen = i;
                break;
            }
        }
        let comp = &self.components[chosen];
        out.copy_from_slice(comp.mean.as_slice());
        if let Some(f) = &comp.factor {
            let z: Vec<f64> = (0..f.ncols()).map(|_| StandardNormal.sample(rng)).collect();
            for (i, o) in out.iter_mut().enumerate() {
                *o += (0..f.ncols()).map(|j| f[(i, j)] * z[j]).sum::<f64>();
            }
        }
    }
}

fn gaussian_components(
    g: &GaussianMixtureTarget,
    map: Option<(&DMatrix<f64>, &DVector<f64>)>,
) -> Vec<AmbientComponent> {
    g.components
        .iter()
        .map(|c| {
            let factor = Cholesky::new(c.cov.clone())
                .expect("validated positive definite")
                .unpack();
            match map {
                None => AmbientComponent {
                    weight: c.weight,
                    mean: c.mean.clone(),
                    cov: Some(c.cov.clone()),
                    factor: Some(factor),
                },
                Some((embed, offset)) => {
                    let mut cov = embed * &c.cov * embed.transpose();
                    symmetrize(&mut cov);
                    AmbientComponent {
                        weight: c.weight,
                        mean: offset + embed * &c.mean,
                        cov: Some(cov),
                        factor: Some(embed * factor),
                    }
                }
            }
        })
        .collect()
}

fn point_components(
    p: &PointMassMixtureTarget,
    map: Option<(&DMatrix<f64>, &DVector<f64>)>,
) -> Vec<AmbientComponent> {
    p.atoms
        .iter()
        .map(|a| AmbientComponent {
            weight: a.weight,
            mean: match map {
                None => a.location.clone(),
                Some((embed, offset)) => offset + embed * &a.location,
            },
            cov: None,
            factor: None,
        })
        .collect()
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for w in weights {
        if !(w > 0.0 && w <= 1.0) {
            return Err(LabError::InvalidTarget(format!(
                "weight {w} is outside (0, 1]"
            )));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(LabError::InvalidTarget(format!(
            "weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

/// Conditional statistics of the forward process at `(t, x)`.
#[derive(Debug, Clone)]
pub struct PosteriorStats {
    /// `g_t(x) = E[x - sqrt(ab) X_0 | X_t = x]`.
    pub g: DVector<f64>,
    /// Jacobian of `g_t`; `I - J` is the conditional covariance of the
    /// standardized noise.
    pub jacobian: DMatrix<f64>,
    pub log_density: f64,
}

/// `log p_{X_t}(x)`.
pub fn marginal_log_density(
    target: &Target,
    schedule: &Schedule,
    t: usize,
    x: &[f64],
) -> Result<f64> {
    target.check_point(x)?;
    target.step_marginal(schedule, t)?.log_density(x)
}

/// Exact score `grad log p_{X_t}(x)` from component responsibilities.
pub fn score_exact(target: &Target, schedule: &Schedule, t: usize, x: &[f64]) -> Result<Vec<f64>> {
    target.check_point(x)?;
    let marginal = target.step_marginal(schedule, t)?;
    let mut out = vec![0.0; target.dim()];
    marginal.score_into(x, &mut out)?;
    Ok(out)
}

/// `g_t(x)` and `J_t(x) = I + (m m^T - S) / (1 - ab)` with `m`, `S` the
/// conditional first and second moments of `x - sqrt(ab) X_0`.
pub fn posterior_stats(
    target: &Target,
    schedule: &Schedule,
    t: usize,
    x: &[f64],
) -> Result<PosteriorStats> {
    target.check_point(x)?;
    let marginal = target.step_marginal(schedule, t)?;
    let moments = marginal.residual_moments(x)?;
    let d = target.dim();
    let m = moments.mean;
    let jacobian =
        DMatrix::identity(d, d) + (&m * m.transpose() - moments.second) / marginal.noise_var();
    Ok(PosteriorStats {
        g: m,
        jacobian,
        log_density: moments.log_density,
    })
}

/// `n` draws of `X_t = sqrt(ab) X_0 + sqrt(1 - ab) W`. Draw `i` uses its own
/// stream, so the first rows do not depend on `n`.
pub fn sample_forward(
    target: &Target,
    schedule: &Schedule,
    t: usize,
    n: usize,
    seed: u64,
) -> Result<SampleMatrix> {
    schedule.check_step(t)?;
    if n == 0 {
        return Err(LabError::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let d = target.dim();
    let ab = schedule.alpha_bar(t);
    let (signal, noise) = (ab.sqrt(), (1.0 - ab).sqrt());
    let mut out = SampleMatrix::zeros(n, d);
    out.as_mut_slice()
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(i, row)| {
            let mut rng = rng::stream(seed, Domain::Forward, i as u64);
            target.sample_data(&mut rng, row);
            for v in row.iter_mut() {
                let w: f64 = StandardNormal.sample(&mut rng);
                *v = signal * *v + noise * w;
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests;
