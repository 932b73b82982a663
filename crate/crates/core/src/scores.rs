//! Score providers: the exact mixture score, controlled perturbations of it,
//! and Monte-Carlo estimation of the averaged score error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::metrics::unit_vector;
use crate::rng::{self, Domain};
use crate::schedule::Schedule;
use crate::targets::{sample_forward, StepMarginal, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Exact,
    ConstantBias,
    Scaled,
    Custom,
}

/// `s_t(x)` for `1 <= t <= steps()`. Implementations must be pure: the same
/// `(t, x)` always yields the same output.
pub trait ScoreProvider: Sync {
    fn dim(&self) -> usize;
    fn steps(&self) -> usize;
    fn kind(&self) -> ProviderKind;
    fn score_into(&self, t: usize, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn score(&self, t: usize, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.score_into(t, x, &mut out)?;
        Ok(out)
    }
}

/// The true score of a target's forward marginals. Per-step marginals are
/// built once at construction.
pub struct ExactProvider {
    dim: usize,
    marginals: Vec<StepMarginal>,
}

impl ExactProvider {
    pub fn new(target: &Target, schedule: &Schedule) -> Result<Self> {
        let marginals = (1..=schedule.steps())
            .map(|t| target.step_marginal(schedule, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: target.dim(),
            marginals,
        })
    }
}

impl ScoreProvider for ExactProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn steps(&self) -> usize {
        self.marginals.len()
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Exact
    }

    fn score_into(&self, t: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_call(self, t, x, out)?;
        self.marginals[t - 1].score_into(x, out)
    }
}

fn check_call<P: ScoreProvider + ?Sized>(p: &P, t: usize, x: &[f64], out: &[f64]) -> Result<()> {
    if t == 0 || t > p.steps() {
        return Err(LabError::StepOutOfRange {
            t,
            steps: p.steps(),
        });
    }
    if x.len() != p.dim() || out.len() != p.dim() {
        return Err(LabError::DimensionMismatch {
            expected: p.dim(),
            got: if x.len() != p.dim() {
                x.len()
            } else {
                out.len()
            },
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `s = s* + eps u` with a fixed unit vector `u`.
    ConstantBias,
    /// `s = (1 + rho) s*`.
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub magnitude: f64,
    #[serde(default)]
    pub direction_seed: u64,
    /// Optional per-step magnitudes (index `t - 1`); overrides `magnitude`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_magnitudes: Option<Vec<f64>>,
}

impl PerturbationSpec {
    pub fn constant_bias(eps: f64, direction_seed: u64) -> Self {
        Self {
            kind: PerturbationKind::ConstantBias,
            magnitude: eps,
            direction_seed,
            step_magnitudes: None,
        }
    }

    pub fn scaled(rho: f64) -> Self {
        Self {
            kind: PerturbationKind::Scaled,
            magnitude: rho,
            direction_seed: 0,
            step_magnitudes: None,
        }
    }

    pub fn validate(&self, steps: usize) -> Result<()> {
        let bad = |m: f64| !(m >= 0.0 && m.is_finite());
        if bad(self.magnitude) {
            return Err(LabError::InvalidArgument(format!(
                "perturbation magnitude must be non-negative, got {}",
                self.magnitude
            )));
        }
        if let Some(per_step) = &self.step_magnitudes {
            if per_step.len() != steps {
                return Err(LabError::DimensionMismatch {
                    expected: steps,
                    got: per_step.len(),
                });
            }
            if per_step.iter().any(|&m| bad(m)) {
                return Err(LabError::InvalidArgument(
                    "per-step magnitudes must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn magnitude_at(&self, t: usize) -> f64 {
        self.step_magnitudes
            .as_ref()
            .map_or(self.magnitude, |m| m[t - 1])
    }

    /// The fixed unit bias direction in `R^dim`.
    pub fn direction(&self, dim: usize) -> Vec<f64> {
        let mut rng = rng::stream(self.direction_seed, Domain::Direction, u64::MAX);
        unit_vector(dim, &mut rng)
    }
}

/// A base provider with a deterministic deviation added.
pub struct PerturbedProvider<P> {
    base: P,
    spec: PerturbationSpec,
    direction: Vec<f64>,
}

impl<P: ScoreProvider> PerturbedProvider<P> {
    pub fn new(base: P, spec: PerturbationSpec) -> Result<Self> {
        spec.validate(base.steps())?;
        let direction = spec.direction(base.dim());
        Ok(Self {
            base,
            spec,
            direction,
        })
    }

    pub fn spec(&self) -> &PerturbationSpec {
        &self.spec
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }
}

impl<P: ScoreProvider> ScoreProvider for PerturbedProvider<P> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn steps(&self) -> usize {
        self.base.steps()
    }

    fn kind(&self) -> ProviderKind {
        match self.spec.kind {
            PerturbationKind::ConstantBias => ProviderKind::ConstantBias,
            PerturbationKind::Scaled => ProviderKind::Scaled,
        }
    }

    fn score_into(&self, t: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.base.score_into(t, x, out)?;
        let m = self.spec.magnitude_at(t);
        if m == 0.0 {
            return Ok(());
        }
        match self.spec.kind {
            PerturbationKind::ConstantBias => {
                for (o, u) in out.iter_mut().zip(&self.direction) {
                    *o += m * u;
                }
            }
            PerturbationKind::Scaled => out.iter_mut().for_each(|o| *o *= 1.0 + m),
        }
        Ok(())
    }
}

/// Wraps a closure `(t, x, out)` as a provider.
pub struct FnProvider<F> {
    dim: usize,
    steps: usize,
    f: F,
}

impl<F> FnProvider<F>
where
    F: Fn(usize, &[f64], &mut [f64]) -> Result<()> + Sync,
{
    pub fn new(dim: usize, steps: usize, f: F) -> Self {
        Self { dim, steps, f }
    }
}

impl<F> ScoreProvider for FnProvider<F>
where
    F: Fn(usize, &[f64], &mut [f64]) -> Result<()> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn steps(&self) -> usize {
        self.steps
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Custom
    }

    fn score_into(&self, t: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_call(self, t, x, out)?;
        (self.f)(t, x, out)
    }
}

impl<P: ScoreProvider + ?Sized> ScoreProvider for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn steps(&self) -> usize {
        (**self).steps()
    }

    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }

    fn score_into(&self, t: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).score_into(t, x, out)
    }
}

impl<P: ScoreProvider + ?Sized> ScoreProvider for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn steps(&self) -> usize {
        (**self).steps()
    }

    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }

    fn score_into(&self, t: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).score_into(t, x, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsScoreEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Per-step mean squared deviation, index `t - 1`.
    pub per_step: Vec<f64>,
}

/// Monte-Carlo estimate of `sqrt((1/T) sum_t E|s_t(X_t) - s_t*(X_t)|^2)` with
/// `n` forward draws per step.
pub fn estimate_eps_score<P: ScoreProvider + ?Sized>(
    provider: &P,
    target: &Target,
    schedule: &Schedule,
    n: usize,
    seed: u64,
) -> Result<EpsScoreEstimate> {
    if n == 0 {
        return Err(LabError::InvalidArgument(
            "need at least one draw per step".into(),
        ));
    }
    if provider.dim() != target.dim() || provider.steps() != schedule.steps() {
        return Err(LabError::InvalidArgument(
            "provider shape does not match the target and schedule".into(),
        ));
    }
    let exact = ExactProvider::new(target, schedule)?;
    let d = target.dim();
    let steps = schedule.steps();
    let stats = (1..=steps)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let xs = sample_forward(target, schedule, t, n, rng::mix(seed, t as u64))?;
            let mut s = vec![0.0; d];
            let mut s_star = vec![0.0; d];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for x in xs.iter_rows() {
                provider.score_into(t, x, &mut s)?;
                exact.score_into(t, x, &mut s_star)?;
                let dev: f64 = s.iter().zip(&s_star).map(|(a, b)| (a - b) * (a - b)).sum();
                sum += dev;
                sum_sq += dev * dev;
            }
            let mean = sum / n as f64;
            let var = if n > 1 {
                ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0)
            } else {
                0.0
            };
            Ok((mean, var / n as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let tf = steps as f64;
    let mean_sq = stats.iter().map(|s| s.0).sum::<f64>() / tf;
    let var_mean_sq = stats.iter().map(|s| s.1).sum::<f64>() / (tf * tf);
    let value = mean_sq.sqrt();
    let stderr = if value > 0.0 {
        var_mean_sq.sqrt() / (2.0 * value)
    } else {
        0.0
    };
    Ok(EpsScoreEstimate {
        value,
        stderr,
        per_step: stats.into_iter().map(|s| s.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::DVector;

    use super::*;
    use crate::targets::{score_exact, PointMassMixtureTarget};

    #[test]
    fn exact_provider_delegates() {
        let schedule = Schedule::new(32, 2.0, 4.0).unwrap();
        let gauss = Target::standard_gaussian(2);
        let p = ExactProvider::new(&gauss, &schedule).unwrap();
        assert_eq!(p.score(7, &[0.5, -1.0]).unwrap(), vec![-0.5, 1.0]);

        let point: Target = PointMassMixtureTarget::single(DVector::zeros(2))
            .unwrap()
            .into();
        let p = ExactProvider::new(&point, &schedule).unwrap();
        let x = [0.3, 0.8];
        let s = p.score(20, &x).unwrap();
        assert_eq!(s, score_exact(&point, &schedule, 20, &x).unwrap());
        let nv = 1.0 - schedule.alpha_bar(20);
        assert!((s[0] + x[0] / nv).abs() < 1e-12);
        assert!(p.score(0, &x).is_err());
        assert!(p.score(33, &x).is_err());
        assert!(p.score(3, &[0.0]).is_err());
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let schedule = Schedule::new(16, 2.0, 4.0).unwrap();
        let target = Target::standard_gaussian(3);
        let base = ExactProvider::new(&target, &schedule).unwrap();
        let p = PerturbedProvider::new(&base, PerturbationSpec::constant_bias(0.0, 1)).unwrap();
        let x = [0.1, 0.2, 0.3];
        assert_eq!(p.score(5, &x).unwrap(), base.score(5, &x).unwrap());
    }

    #[test]
    fn constant_bias_realizes_eps_exactly() {
        let schedule = Schedule::new(32, 2.0, 4.0).unwrap();
        let target = Target::standard_gaussian(2);
        let base = ExactProvider::new(&target, &schedule).unwrap();
        let p = PerturbedProvider::new(base, PerturbationSpec::constant_bias(0.05, 9)).unwrap();
        let est = estimate_eps_score(&p, &target, &schedule, 10_000, 3).unwrap();
        assert!((est.value - 0.05).abs() < 1e-10, "{}", est.value);
        let norm: f64 = p.direction().iter().map(|u| u * u).sum();
        assert!((norm - 1.0).abs() < 1e-14);

        // homogeneity in the magnitude
        let base = ExactProvider::new(&target, &schedule).unwrap();
        let p2 = PerturbedProvider::new(base, PerturbationSpec::constant_bias(0.1, 9)).unwrap();
        let est2 = estimate_eps_score(&p2, &target, &schedule, 100, 3).unwrap();
        assert!((est2.value - 2.0 * est.value).abs() < 1e-10);
    }

    #[test]
    fn exact_provider_has_zero_eps() {
        let schedule = Schedule::new(16, 2.0, 4.0).unwrap();
        let target = Target::standard_gaussian(2);
        let p = ExactProvider::new(&target, &schedule).unwrap();
        let est = estimate_eps_score(&p, &target, &schedule, 200, 1).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn scaled_perturbation_on_standard_gaussian() {
        // s* = -x and E|X_t|^2 = d, so eps^2 = rho^2 d
        let schedule = Schedule::new(16, 2.0, 4.0).unwrap();
        let target = Target::standard_gaussian(4);
        let base = ExactProvider::new(&target, &schedule).unwrap();
        let p = PerturbedProvider::new(base, PerturbationSpec::scaled(0.1)).unwrap();
        let est = estimate_eps_score(&p, &target, &schedule, 5_000, 2).unwrap();
        assert!(
            (est.value - 0.2).abs() < 3.0 * est.stderr,
            "{} +- {}",
            est.value,
            est.stderr
        );
        assert!(est.stderr > 0.0);
    }

    #[test]
    fn perturbation_spec_validation_and_purity() {
        let schedule = Schedule::new(16, 2.0, 4.0).unwrap();
        let target = Target::standard_gaussian(2);
        let base = ExactProvider::new(&target, &schedule).unwrap();
        assert!(PerturbedProvider::new(&base, PerturbationSpec::constant_bias(-0.1, 0)).is_err());
        let mut spec = PerturbationSpec::constant_bias(0.1, 0);
        spec.step_magnitudes = Some(vec![0.1; 3]);
        assert!(PerturbedProvider::new(&base, spec).is_err());

        let p = PerturbedProvider::new(&base, PerturbationSpec::constant_bias(0.3, 4)).unwrap();
        let x = [1.0, 2.0];
        assert_eq!(p.score(3, &x).unwrap(), p.score(3, &x).unwrap());
        let toml_text = "kind = \"constant_bias\"\nmagnitude = 0.3\ndirection_seed = 4\n";
        let parsed: PerturbationSpec = toml::from_str(toml_text).unwrap();
        assert_eq!(&parsed, p.spec());
    }

    #[test]
    fn closure_provider_is_custom() {
        let p = FnProvider::new(1, 8, |_t, x: &[f64], out: &mut [f64]| {
            out[0] = -2.0 * x[0];
            Ok(())
        });
        assert_eq!(p.kind(), ProviderKind::Custom);
        assert_eq!(p.score(2, &[1.5]).unwrap(), vec![-3.0]);
        assert!(p.score(9, &[1.5]).is_err());
    }
}
