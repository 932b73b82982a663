//! Reverse-process samplers: DDPM with the standard or low-dimensional
//! coefficient design, DDIM, and the exact Gaussian recursion used as an
//! oracle.
//!
//! Each trajectory owns a random stream keyed by `(seed, trajectory)`. It
//! draws the initial `Y_T` first and then `z_T, ..., z_2`, one `d`-vector per
//! step, so a run is reproducible regardless of scheduling and adding
//! trajectories leaves existing ones untouched.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::rng::{self, Domain};
use crate::samples::SampleMatrix;
use crate::schedule::Schedule;
use crate::scores::ScoreProvider;
use crate::targets::{Target, TargetDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignTag {
    DdpmStandard,
    DdpmLowdim,
    Ddim,
    Custom,
}

impl DesignTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignTag::DdpmStandard => "ddpm_standard",
            DesignTag::DdpmLowdim => "ddpm_lowdim",
            DesignTag::Ddim => "ddim",
            DesignTag::Custom => "custom",
        }
    }
}

impl std::fmt::Display for DesignTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DesignTag {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ddpm_standard" | "standard" => Ok(DesignTag::DdpmStandard),
            "ddpm_lowdim" | "lowdim" => Ok(DesignTag::DdpmLowdim),
            "ddim" => Ok(DesignTag::Ddim),
            "custom" => Ok(DesignTag::Custom),
            other => Err(LabError::InvalidArgument(format!(
                "unknown design tag `{other}`"
            ))),
        }
    }
}

/// Per-step `(eta_t, sigma_t)` of `Y_{t-1} = (Y_t + eta_t s_t(Y_t) + sigma_t Z) / sqrt(alpha_t)`,
/// together with the `alpha_t` they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerCoefficients {
    eta: Vec<f64>,
    sigma: Vec<f64>,
    alpha: Vec<f64>,
    design: DesignTag,
}

impl SamplerCoefficients {
    /// `eta_t = sigma_t^2 = 1 - alpha_t`.
    pub fn standard(schedule: &Schedule) -> Self {
        let eta: Vec<f64> = schedule.alphas().iter().map(|a| 1.0 - a).collect();
        let sigma = eta.iter().map(|e| e.sqrt()).collect();
        Self::assemble(schedule, eta, sigma, DesignTag::DdpmStandard)
    }

    /// `eta_t = 1 - alpha_t`, `sigma_t^2 = (1 - alpha_t)(alpha_t - ab_t)/(1 - ab_t)`;
    /// `sigma_1 = 0` because `alpha_1 = ab_1`.
    pub fn lowdim(schedule: &Schedule) -> Self {
        let eta: Vec<f64> = schedule.alphas().iter().map(|a| 1.0 - a).collect();
        let sigma = schedule
            .alphas()
            .iter()
            .zip(schedule.alpha_bars())
            .map(|(&a, &ab)| ((1.0 - a) * (a - ab) / (1.0 - ab)).max(0.0).sqrt())
            .collect();
        Self::assemble(schedule, eta, sigma, DesignTag::DdpmLowdim)
    }

    /// `eta_t = (1 - alpha_t)/2`, `sigma_t = 0`.
    pub fn ddim(schedule: &Schedule) -> Self {
        let eta = schedule.alphas().iter().map(|a| 0.5 * (1.0 - a)).collect();
        Self::assemble(schedule, eta, vec![0.0; schedule.steps()], DesignTag::Ddim)
    }

    pub fn custom(schedule: &Schedule, eta: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let steps = schedule.steps();
        if eta.len() != steps || sigma.len() != steps {
            return Err(LabError::DimensionMismatch {
                expected: steps,
                got: if eta.len() != steps {
                    eta.len()
                } else {
                    sigma.len()
                },
            });
        }
        if eta.iter().any(|e| !e.is_finite()) || sigma.iter().any(|s| !(*s >= 0.0 && s.is_finite()))
        {
            return Err(LabError::InvalidArgument(
                "eta must be finite and sigma finite and non-negative".into(),
            ));
        }
        Ok(Self::assemble(schedule, eta, sigma, DesignTag::Custom))
    }

    pub fn for_design(design: DesignTag, schedule: &Schedule) -> Result<Self> {
        match design {
            DesignTag::DdpmStandard => Ok(Self::standard(schedule)),
            DesignTag::DdpmLowdim => Ok(Self::lowdim(schedule)),
            DesignTag::Ddim => Ok(Self::ddim(schedule)),
            DesignTag::Custom => Err(LabError::InvalidArgument(
                "custom coefficients must be given explicitly".into(),
            )),
        }
    }

    fn assemble(schedule: &Schedule, eta: Vec<f64>, sigma: Vec<f64>, design: DesignTag) -> Self {
        Self {
            eta,
            sigma,
            alpha: schedule.alphas().to_vec(),
            design,
        }
    }

    pub fn steps(&self) -> usize {
        self.eta.len()
    }

    pub fn design(&self) -> DesignTag {
        self.design
    }

    pub fn eta(&self, t: usize) -> f64 {
        self.eta[t - 1]
    }

    pub fn sigma(&self, t: usize) -> f64 {
        self.sigma[t - 1]
    }

    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }

    pub fn etas(&self) -> &[f64] {
        &self.eta
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigma
    }
}

/// One reverse step `(y + eta_t s_t(y) + sigma_t z) / sqrt(alpha_t)` written
/// into `out`.
pub fn ddpm_step<P: ScoreProvider + ?Sized>(
    y: &[f64],
    t: usize,
    provider: &P,
    coeffs: &SamplerCoefficients,
    z: &[f64],
    out: &mut [f64],
) -> Result<()> {
    if t == 0 || t > coeffs.steps() {
        return Err(LabError::StepOutOfRange {
            t,
            steps: coeffs.steps(),
        });
    }
    provider.score_into(t, y, out)?;
    let (eta, sigma) = (coeffs.eta(t), coeffs.sigma(t));
    let inv_sqrt_alpha = 1.0 / coeffs.alpha(t).sqrt();
    for ((o, yi), zi) in out.iter_mut().zip(y).zip(z) {
        *o = (yi + eta * *o + sigma * zi) * inv_sqrt_alpha;
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(LabError::NonFinite { t, trajectory: 0 });
    }
    Ok(())
}

/// Coordinate-wise mean and variance of the ensemble after producing `Y_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub t: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseRunResult {
    /// `n x d` draws of `Y_1`.
    pub samples: SampleMatrix,
    pub per_step_stats: Option<Vec<StepStats>>,
    pub seed: u64,
    pub steps: usize,
    pub design: DesignTag,
}

/// Runs `n` trajectories from `Y_T ~ N(0, I)` down to `Y_1`.
pub fn run_reverse<P: ScoreProvider + ?Sized>(
    provider: &P,
    schedule: &Schedule,
    coeffs: &SamplerCoefficients,
    n: usize,
    seed: u64,
) -> Result<ReverseRunResult> {
    reverse(provider, schedule, coeffs, n, seed, false)
}

/// As [`run_reverse`], also recording ensemble moments after every step.
pub fn run_reverse_traced<P: ScoreProvider + ?Sized>(
    provider: &P,
    schedule: &Schedule,
    coeffs: &SamplerCoefficients,
    n: usize,
    seed: u64,
) -> Result<ReverseRunResult> {
    reverse(provider, schedule, coeffs, n, seed, true)
}

fn reverse<P: ScoreProvider + ?Sized>(
    provider: &P,
    schedule: &Schedule,
    coeffs: &SamplerCoefficients,
    n: usize,
    seed: u64,
    traced: bool,
) -> Result<ReverseRunResult> {
    schedule.ensure_usable()?;
    if n == 0 {
        return Err(LabError::InvalidArgument(
            "trajectory count must be at least 1".into(),
        ));
    }
    let steps = schedule.steps();
    if coeffs.steps() != steps || provider.steps() != steps {
        return Err(LabError::InvalidArgument(format!(
            "schedule has {steps} steps but coefficients have {} and the provider {}",
            coeffs.steps(),
            provider.steps()
        )));
    }
    let d = provider.dim();
    let mut state = SampleMatrix::zeros(n, d);
    let mut streams: Vec<ChaCha8Rng> = (0..n as u64)
        .map(|i| rng::stream(seed, Domain::Trajectory, i))
        .collect();
    state
        .as_mut_slice()
        .par_chunks_mut(d)
        .zip(streams.par_iter_mut())
        .for_each(|(row, rng)| rng::fill_normal(rng, row));

    let mut trace = traced.then(Vec::new);
    for t in (2..=steps).rev() {
        let failure = state
            .as_mut_slice()
            .par_chunks_mut(d)
            .zip(streams.par_iter_mut())
            .enumerate()
            .map_init(
                || (vec![0.0; d], vec![0.0; d]),
                |(z, next), (i, (row, rng))| {
                    rng::fill_normal(rng, z);
                    match ddpm_step(row, t, provider, coeffs, z, next) {
                        Ok(()) => {
                            row.copy_from_slice(next);
                            None
                        }
                        Err(LabError::NonFinite { t, .. }) => {
                            Some((i, LabError::NonFinite { t, trajectory: i }))
                        }
                        Err(e) => Some((i, e)),
                    }
                },
            )
            .flatten()
            .min_by_key(|(i, _)| *i);
        if let Some((_, err)) = failure {
            return Err(err);
        }
        if let Some(trace) = trace.as_mut() {
            let mean = state.mean();
            let cov = state.covariance();
            trace.push(StepStats {
                t: t - 1,
                variance: (0..d).map(|j| cov[j * d + j]).collect(),
                mean,
            });
        }
    }
    Ok(ReverseRunResult {
        samples: state,
        per_step_stats: trace,
        seed,
        steps,
        design: coeffs.design(),
    })
}

/// Exact law of `Y_1` when every coordinate of the target is
/// `N(mu0, sigma0_sq)` and the provider returns `(1 + scale) s* + bias`.
/// Every step is affine in `Y_t`, so the Gaussian law propagates in closed
/// form from `Y_T ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOracle {
    pub mu0: f64,
    /// Data variance; `0` gives a point mass at `mu0`.
    pub sigma0_sq: f64,
    pub bias: f64,
    pub scale: f64,
}

impl GaussianOracle {
    pub fn centered(sigma0_sq: f64) -> Self {
        Self {
            mu0: 0.0,
            sigma0_sq,
            bias: 0.0,
            scale: 0.0,
        }
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn with_mean(mut self, mu0: f64) -> Self {
        self.mu0 = mu0;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// `(mean, variance)` of `Y_1`.
    pub fn run(&self, schedule: &Schedule, coeffs: &SamplerCoefficients) -> Result<(f64, f64)> {
        if !(self.sigma0_sq >= 0.0 && self.sigma0_sq.is_finite()) {
            return Err(LabError::InvalidArgument(format!(
                "data variance must be non-negative, got {}",
                self.sigma0_sq
            )));
        }
        schedule.ensure_usable()?;
        if coeffs.steps() != schedule.steps() {
            return Err(LabError::DimensionMismatch {
                expected: schedule.steps(),
                got: coeffs.steps(),
            });
        }
        let (mut m, mut v) = (0.0, 1.0);
        for t in (2..=schedule.steps()).rev() {
            let ab = schedule.alpha_bar(t);
            let alpha = schedule.alpha(t);
            let v_star = ab * self.sigma0_sq + 1.0 - ab;
            let eta = coeffs.eta(t);
            let sigma = coeffs.sigma(t);
            let gain = (1.0 + self.scale) * eta / v_star;
            let a = (1.0 - gain) / alpha.sqrt();
            let shift = (gain * ab.sqrt() * self.mu0 + eta * self.bias) / alpha.sqrt();
            m = a * m + shift;
            v = a * a * v + sigma * sigma / alpha;
        }
        Ok((m, v))
    }

    /// Law of the forward marginal `X_t`.
    pub fn forward(&self, schedule: &Schedule, t: usize) -> (f64, f64) {
        let ab = schedule.alpha_bar(t);
        (ab.sqrt() * self.mu0, ab * self.sigma0_sq + 1.0 - ab)
    }
}

/// `(m_1, v_1)` for the target `N(0, sigma0_sq I)` with exact scores.
pub fn gaussian_oracle_reverse(
    sigma0_sq: f64,
    schedule: &Schedule,
    coeffs: &SamplerCoefficients,
) -> Result<(f64, f64)> {
    if !(sigma0_sq > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "data variance must be positive, got {sigma0_sq}"
        )));
    }
    GaussianOracle::centered(sigma0_sq).run(schedule, coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumpFormat {
    Csv,
    Binary,
}

impl std::str::FromStr for DumpFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DumpFormat::Csv),
            "binary" | "bin" => Ok(DumpFormat::Binary),
            other => Err(LabError::InvalidArgument(format!(
                "unknown format `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub seed: u64,
    #[serde(rename = "T")]
    pub steps: usize,
    pub design_tag: DesignTag,
    pub target_hash: String,
    pub n: usize,
    pub d: usize,
    pub format: DumpFormat,
}

/// SHA-256 of the target's canonical JSON definition.
pub fn target_hash(target: &Target) -> String {
    let json = serde_json::to_vec(&TargetDef::from(target)).expect("definitions serialize");
    hex::encode(Sha256::digest(json))
}

/// Writes the `Y_1` matrix to `path` and a `<path>.meta.json` sidecar.
/// Returns the sidecar path.
pub fn write_sample_dump(
    result: &ReverseRunResult,
    target: &Target,
    path: &Path,
    format: DumpFormat,
) -> Result<PathBuf> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        DumpFormat::Csv => result.samples.write_csv(file)?,
        DumpFormat::Binary => result.samples.write_binary(file)?,
    }
    let meta = DumpMeta {
        seed: result.seed,
        steps: result.steps,
        design_tag: result.design,
        target_hash: target_hash(target),
        n: result.samples.rows(),
        d: result.samples.cols(),
        format,
    };
    let mut meta_path = path.as_os_str().to_owned();
    meta_path.push(".meta.json");
    let meta_path = PathBuf::from(meta_path);
    let mut out = std::fs::File::create(&meta_path)?;
    serde_json::to_writer_pretty(&mut out, &meta).map_err(|e| LabError::Config(e.to_string()))?;
    writeln!(out)?;
    Ok(meta_path)
}
