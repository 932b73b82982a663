//! Desk-scale checks of every module's invariants, reported with margins
//! instead of panicking.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::with_workers;
use crate::metrics::{
    kl_gaussians_1d, kl_gaussians_same_cov, kl_step_gaussian, pinsker_check, tv_gaussians_1d,
    tv_isotropic_gaussians,
};
use crate::rng::{self, Domain};
use crate::samplers::{run_reverse, GaussianOracle, SamplerCoefficients};
use crate::schedule::{check_schedule_arrays, Schedule};
use crate::scores::{estimate_eps_score, ExactProvider, PerturbationSpec, PerturbedProvider};
use crate::targets::{
    marginal_log_density, posterior_stats, sample_forward, score_exact, Atom, BaseTarget,
    EmbeddedTarget, GaussianComponent, GaussianMixtureTarget, PointMassMixtureTarget, Target,
    TargetModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Distance to the failure threshold; negative on failure.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Overwrites one `beta_t` of the checked schedules, for fault injection.
    pub inject_beta: Option<f64>,
    pub derivative_triples: usize,
    pub psd_triples: usize,
    pub posterior_draws: usize,
    pub linear_trajectories: usize,
}

impl ValidationOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inject_beta: None,
            derivative_triples: 200,
            psd_triples: 1000,
            posterior_draws: 1_000_000,
            linear_trajectories: 100_000,
        }
    }
}

pub fn run_validation_suite(seed: u64) -> ValidationReport {
    run_validation_with(&ValidationOptions::new(seed))
}

pub fn run_validation_with(opts: &ValidationOptions) -> ValidationReport {
    let mut checks = Vec::new();
    schedule_checks(opts, &mut checks);
    let mut record = |name: &str, outcome: crate::Result<CheckResult>| {
        checks.push(outcome.unwrap_or_else(|e| CheckResult {
            name: name.into(),
            passed: false,
            margin: f64::NEG_INFINITY,
            detail: format!("error: {e}"),
        }));
    };
    record(
        "score_finite_difference",
        derivative_check(opts, Derivative::Score),
    );
    record(
        "jacobian_finite_difference",
        derivative_check(opts, Derivative::Jacobian),
    );
    record("posterior_covariance_psd", psd_check(opts));
    record("covariance_identity", covariance_identity(opts));
    record("kl_step_matches_gaussian_kl", kl_step_check(opts));
    record("pinsker", pinsker_pairs());
    record("tv_symmetry", tv_symmetry(opts));
    record("design_consistency", design_consistency());
    record("linear_score_equivalence", linear_score_equivalence(opts));
    record("eps_score_constant_bias", eps_score_check(opts));
    record("determinism_across_workers", determinism(opts));
    ValidationReport {
        seed: opts.seed,
        checks,
    }
}

fn check(name: &str, margin: f64, detail: String) -> crate::Result<CheckResult> {
    Ok(CheckResult {
        name: name.into(),
        passed: margin >= 0.0,
        margin,
        detail,
    })
}

fn schedule_checks(opts: &ValidationOptions, out: &mut Vec<CheckResult>) {
    for steps in [64, 256, 1024] {
        let name = format!("schedule_bounds_T{steps}");
        let s = match Schedule::new(steps, 2.0, 4.0) {
            Ok(s) => s,
            Err(e) => {
                out.push(CheckResult {
                    name,
                    passed: false,
                    margin: f64::NEG_INFINITY,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let mut beta = s.betas().to_vec();
        if let Some(b) = opts.inject_beta {
            beta[steps / 2] = b;
        }
        let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
        let alpha_bar: Vec<f64> = alpha
            .iter()
            .scan(1.0, |acc, a| {
                *acc *= a;
                Some(*acc)
            })
            .collect();
        let report = check_schedule_arrays(s.c1(), &beta, &alpha, &alpha_bar);
        let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
        let margin = report
            .checks
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min);
        out.push(CheckResult {
            name,
            passed: report.all_passed(),
            margin,
            detail: if failed.is_empty() {
                format!("{} inequalities hold", report.checks.len())
            } else {
                format!("failed: {}", failed.join(", "))
            },
        });
    }
}

fn mixture_2d() -> Target {
    GaussianMixtureTarget::new(vec![
        GaussianComponent {
            weight: 0.3,
            mean: DVector::from_vec(vec![1.0, -0.5]),
            cov: DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, 0.3]),
        },
        GaussianComponent {
            weight: 0.7,
            mean: DVector::from_vec(vec![-0.8, 0.9]),
            cov: DMatrix::from_row_slice(2, 2, &[0.2, -0.05, -0.05, 0.4]),
        },
    ])
    .expect("valid mixture")
    .into()
}

fn mixture_3d() -> Target {
    GaussianMixtureTarget::new(vec![
        GaussianComponent {
            weight: 0.5,
            mean: DVector::from_vec(vec![0.5, 0.0, -0.5]),
            cov: DMatrix::from_row_slice(3, 3, &[0.6, 0.1, 0.0, 0.1, 0.4, 0.05, 0.0, 0.05, 0.3]),
        },
        GaussianComponent {
            weight: 0.5,
            mean: DVector::from_vec(vec![-0.5, 0.7, 0.2]),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vec![0.3, 0.5, 0.2])),
        },
    ])
    .expect("valid mixture")
    .into()
}

fn atoms_2d() -> PointMassMixtureTarget {
    PointMassMixtureTarget::new(
        [(0.2, [0.0, 0.0]), (0.5, [1.5, 0.4]), (0.3, [-0.7, 1.2])]
            .into_iter()
            .map(|(w, l)| Atom {
                weight: w,
                location: DVector::from_column_slice(&l),
            })
            .collect(),
    )
    .expect("valid atoms")
}

fn targets() -> Vec<Target> {
    let atoms = atoms_2d();
    let embedded =
        EmbeddedTarget::with_random_embedding(BaseTarget::PointMasses(atoms.clone()), 5, 3)
            .expect("valid embedding");
    vec![mixture_2d(), mixture_3d(), atoms.into(), embedded.into()]
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1.0)
}

type Triple = (Target, Schedule, usize, Vec<f64>);

/// Random `(target, schedule, t, x)` with `x` a forward draw at `t`.
fn triples(
    opts: &ValidationOptions,
    count: usize,
    salt: u64,
) -> crate::Result<Vec<Triple>> {
    let targets = targets();
    let mut r = rng::stream(opts.seed, Domain::Validation, salt);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let target = targets[i % targets.len()].clone();
        let steps = [64, 256][r.random_range(0..2)];
        let schedule = Schedule::new(steps, 2.0, 4.0)?;
        let t = r.random_range(1..=steps);
        let x = sample_forward(&target, &schedule, t, 1, r.random())?
            .row(0)
            .to_vec();
        out.push((target, schedule, t, x));
    }
    Ok(out)
}

enum Derivative {
    Score,
    Jacobian,
}

fn central_difference(
    f: impl Fn(&[f64]) -> crate::Result<Vec<f64>>,
    x: &[f64],
    h: f64,
) -> crate::Result<Vec<Vec<f64>>> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += h;
            dn[i] -= h;
            let (fu, fd) = (f(&up)?, f(&dn)?);
            Ok(fu
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect())
        })
        .collect()
}

fn derivative_check(opts: &ValidationOptions, which: Derivative) -> crate::Result<CheckResult> {
    const TOL: f64 = 1e-4;
    let (name, salt) = match which {
        Derivative::Score => ("score_finite_difference", 1),
        Derivative::Jacobian => ("jacobian_finite_difference", 2),
    };
    let mut worst: f64 = 0.0;
    for (target, schedule, t, x) in triples(opts, opts.derivative_triples, salt)? {
        let h = 1e-4 * (1.0 - schedule.alpha_bar(t)).sqrt();
        let err = match which {
            Derivative::Score => {
                let s = score_exact(&target, &schedule, t, &x)?;
                let fd = central_difference(
                    |y| Ok(vec![marginal_log_density(&target, &schedule, t, y)?]),
                    &x,
                    h,
                )?;
                let fd: Vec<f64> = fd.into_iter().map(|c| c[0]).collect();
                rel_err(&s, &fd)
            }
            Derivative::Jacobian => {
                // J = d g / d x with g = -(1 - ab) s
                let nv = 1.0 - schedule.alpha_bar(t);
                let stats = posterior_stats(&target, &schedule, t, &x)?;
                let cols = central_difference(
                    |y| {
                        Ok(score_exact(&target, &schedule, t, y)?
                            .iter()
                            .map(|s| -nv * s)
                            .collect())
                    },
                    &x,
                    h,
                )?;
                let d = x.len();
                let fd = DMatrix::from_fn(d, d, |i, j| cols[j][i]);
                rel_err(stats.jacobian.as_slice(), fd.as_slice())
            }
        };
        worst = worst.max(err);
    }
    check(
        name,
        TOL - worst,
        format!(
            "max relative error {worst:.3e} over {} triples",
            opts.derivative_triples
        ),
    )
}

fn psd_check(opts: &ValidationOptions) -> crate::Result<CheckResult> {
    const TOL: f64 = 1e-8;
    let mut worst = f64::INFINITY;
    for (target, schedule, t, x) in triples(opts, opts.psd_triples, 3)? {
        let stats = posterior_stats(&target, &schedule, t, &x)?;
        let d = x.len();
        let cov = DMatrix::identity(d, d) - &stats.jacobian;
        let cov = 0.5 * (&cov + cov.transpose());
        let scale = cov.norm().max(1.0);
        worst = worst.min(cov.symmetric_eigenvalues().min() / scale);
    }
    check(
        "posterior_covariance_psd",
        worst + TOL,
        format!(
            "min relative eigenvalue {worst:.3e} over {} triples",
            opts.psd_triples
        ),
    )
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let (mut inv, mut f) = (0.0, 1.0 / base as f64);
    while i > 0 {
        inv += (i % base) as f64 * f;
        i /= base;
        f /= base as f64;
    }
    inv
}

/// Randomly shifted Halton points mapped to standard normals by Box-Muller.
fn qmc_normals(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let uniforms = 2 * dim.div_ceil(2);
    assert!(
        uniforms <= PRIMES.len(),
        "dimension too large for the Halton table"
    );
    let mut r = rng::stream(seed, Domain::Validation, 0x0C);
    let shift: Vec<f64> = (0..uniforms).map(|_| r.random()).collect();
    (0..n)
        .map(|i| {
            let u: Vec<f64> = (0..uniforms)
                .map(|j| (radical_inverse(i as u64 + 1, PRIMES[j]) + shift[j]).fract())
                .collect();
            let mut z = Vec::with_capacity(uniforms);
            for pair in u.chunks(2) {
                let radius = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
                let angle = std::f64::consts::TAU * pair[1];
                z.push(radius * angle.cos());
                z.push(radius * angle.sin());
            }
            z.truncate(dim);
            z
        })
        .collect()
}

/// `Cov(W | X_t = x)` from prior draws weighted by the forward likelihood,
/// stratified by mixture component.
fn posterior_noise_covariance(
    target: &Target,
    ab: f64,
    x: &[f64],
    draws: usize,
    seed: u64,
) -> DMatrix<f64> {
    let d = x.len();
    let nv = 1.0 - ab;
    let x = DVector::from_column_slice(x);
    let mut strata: Vec<(f64, Vec<DVector<f64>>)> = Vec::new();
    match target.model() {
        TargetModel::GaussianMixture(g) => {
            let z = qmc_normals(draws, d, seed);
            for c in g.components() {
                let l = c.cov.clone().cholesky().expect("positive definite").l();
                let pts = z
                    .iter()
                    .map(|zi| &c.mean + &l * DVector::from_column_slice(zi))
                    .collect();
                strata.push((c.weight, pts));
            }
        }
        TargetModel::PointMasses(p) => {
            for a in p.atoms() {
                strata.push((a.weight, vec![a.location.clone()]));
            }
        }
        TargetModel::Embedded(_) => unreachable!("identity checked on ambient mixtures"),
    }
    // log-sum-exp over all weighted draws
    let mut logs = Vec::new();
    let mut residuals = Vec::new();
    for (w, pts) in &strata {
        let lw = (w / pts.len() as f64).ln();
        for x0 in pts {
            let r = &x - x0 * ab.sqrt();
            logs.push(lw - 0.5 * r.norm_squared() / nv);
            residuals.push(r);
        }
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut mean = DVector::zeros(d);
    let mut second = DMatrix::zeros(d, d);
    for (l, r) in logs.iter().zip(&residuals) {
        let w = (l - top).exp();
        total += w;
        mean += r * w;
        second += r * r.transpose() * w;
    }
    mean /= total;
    second /= total;
    (second - &mean * mean.transpose()) / nv
}

fn covariance_identity(opts: &ValidationOptions) -> crate::Result<CheckResult> {
    const TOL: f64 = 1e-3;
    let schedule = Schedule::new(64, 2.0, 4.0)?;
    let cases: Vec<Target> = vec![mixture_2d(), mixture_3d(), atoms_2d().into()];
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    for (ci, target) in cases.iter().enumerate() {
        for t in [48, 56, 64] {
            let x = sample_forward(
                target,
                &schedule,
                t,
                1,
                rng::mix(opts.seed, (ci * 100 + t) as u64),
            )?;
            let x = x.row(0);
            let stats = posterior_stats(target, &schedule, t, x)?;
            let d = x.len();
            let identity = DMatrix::identity(d, d) - &stats.jacobian;
            let draws = opts.posterior_draws;
            let mc = posterior_noise_covariance(
                target,
                schedule.alpha_bar(t),
                x,
                draws,
                rng::mix(opts.seed, t as u64),
            );
            let err = (&identity - &mc).norm() / mc.norm().max(1e-300);
            worst = worst.max(err);
            evaluated += 1;
        }
    }
    check(
        "covariance_identity",
        TOL - worst,
        format!(
            "max relative Frobenius error {worst:.3e} over {evaluated} points, {} draws each",
            opts.posterior_draws
        ),
    )
}

fn kl_step_check(opts: &ValidationOptions) -> crate::Result<CheckResult> {
    const TOL: f64 = 1e-12;
    let mut r = rng::stream(opts.seed, Domain::Validation, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = r.random_range(1..=5);
        let alpha: f64 = r.random_range(0.5..0.9999);
        let mut s_est = vec![0.0; d];
        let mut s_true = vec![0.0; d];
        rng::fill_normal(&mut r, &mut s_est);
        rng::fill_normal(&mut r, &mut s_true);
        let fast = kl_step_gaussian(&s_est, &s_true, alpha)?;
        let eta = 1.0 - alpha;
        let mean = |s: &[f64]| DVector::from_iterator(d, s.iter().map(|v| eta * v / alpha.sqrt()));
        let cov = DMatrix::identity(d, d) * ((1.0 - alpha) / alpha);
        let generic = kl_gaussians_same_cov(&mean(&s_est), &mean(&s_true), &cov)?;
        worst = worst.max((fast - generic).abs() / generic.abs().max(1e-300));
    }
    check(
        "kl_step_matches_gaussian_kl",
        TOL - worst,
        format!("max relative error {worst:.3e} over 1000 inputs"),
    )
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

fn pinsker_pairs() -> crate::Result<CheckResult> {
    let mut pairs = Vec::new();
    for steps in [16, 64, 256] {
        let schedule = Schedule::new(steps, 2.0, 4.0)?;
        for coeffs in [
            SamplerCoefficients::standard(&schedule),
            SamplerCoefficients::lowdim(&schedule),
        ] {
            for oracle in [
                GaussianOracle::centered(2.0),
                GaussianOracle::centered(0.5).with_mean(1.0),
                GaussianOracle::centered(2.0).with_bias(0.1),
            ] {
                let (mx, vx) = oracle.forward(&schedule, 1);
                let (my, vy) = oracle.run(&schedule, &coeffs)?;
                pairs.push((
                    tv_gaussians_1d(mx, vx, my, vy)?,
                    kl_gaussians_1d(mx, vx, my, vy)?,
                ));
                for dim in [2, 8] {
                    let (_, vc) =
                        GaussianOracle::centered(oracle.sigma0_sq).run(&schedule, &coeffs)?;
                    let (_, vf) = GaussianOracle::centered(oracle.sigma0_sq).forward(&schedule, 1);
                    let ratio = vf / vc;
                    let kl = 0.5 * dim as f64 * (ratio - 1.0 - ratio.ln());
                    pairs.push((tv_isotropic_gaussians(dim, vf, vc)?, kl));
                }
            }
            // one reverse step with a biased score: equal covariances
            for t in [2, steps / 2, steps] {
                let alpha = schedule.alpha(t);
                let kl = kl_step_gaussian(&[0.3, -0.2], &[0.0, 0.0], alpha)?;
                let shift = (1.0 - alpha).sqrt() * (0.3f64.hypot(0.2));
                pairs.push((2.0 * std_normal_cdf(0.5 * shift) - 1.0, kl));
            }
        }
    }
    let worst = pairs
        .iter()
        .map(|&(tv, kl)| (kl.max(0.0) / 2.0).sqrt() - tv)
        .fold(f64::INFINITY, f64::min);
    let ok = pairs.iter().all(|&(tv, kl)| pinsker_check(tv, kl));
    Ok(CheckResult {
        name: "pinsker".into(),
        passed: ok,
        margin: worst,
        detail: format!("{} (tv, kl) pairs", pairs.len()),
    })
}

fn tv_symmetry(opts: &ValidationOptions) -> crate::Result<CheckResult> {
    let mut r = rng::stream(opts.seed, Domain::Validation, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (m1, m2): (f64, f64) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let (v1, v2): (f64, f64) = (r.random_range(0.1..4.0), r.random_range(0.1..4.0));
        worst =
            worst.max((tv_gaussians_1d(m1, v1, m2, v2)? - tv_gaussians_1d(m2, v2, m1, v1)?).abs());
        let d = r.random_range(1..10);
        worst = worst
            .max((tv_isotropic_gaussians(d, v1, v2)? - tv_isotropic_gaussians(d, v2, v1)?).abs());
    }
    check(
        "tv_symmetry",
        1e-12 - worst,
        format!("max asymmetry {worst:.3e}"),
    )
}

fn design_consistency() -> crate::Result<CheckResult> {
    let schedule = Schedule::new(256, 2.0, 4.0)?;
    let std = SamplerCoefficients::standard(&schedule);
    let low = SamplerCoefficients::lowdim(&schedule);
    let ddim = SamplerCoefficients::ddim(&schedule);
    let mut margin = f64::INFINITY;
    for t in 2..=schedule.steps() {
        margin = margin.min(std.sigma(t) - low.sigma(t));
        margin = margin.min(-(std.eta(t) - low.eta(t)).abs());
        margin = margin.min(-ddim.sigma(t).abs());
        margin = margin.min(-(2.0 * ddim.eta(t) - std.eta(t)).abs());
    }
    check(
        "design_consistency",
        margin,
        "lowdim noise below standard; shared drift; DDIM noiseless with half drift".into(),
    )
}

fn linear_score_equivalence(opts: &ValidationOptions) -> crate::Result<CheckResult> {
    let schedule = Schedule::new(32, 2.0, 4.0)?;
    let target = GaussianMixtureTarget::isotropic(1, 2.0)?.into();
    let provider = ExactProvider::new(&target, &schedule)?;
    let n = opts.linear_trajectories;
    let mut worst_z: f64 = 0.0;
    for coeffs in [
        SamplerCoefficients::standard(&schedule),
        SamplerCoefficients::lowdim(&schedule),
        SamplerCoefficients::ddim(&schedule),
    ] {
        let (m, v) = GaussianOracle::centered(2.0).run(&schedule, &coeffs)?;
        let run = run_reverse(&provider, &schedule, &coeffs, n, rng::mix(opts.seed, 6))?;
        let mean = run.samples.mean()[0];
        let var = run.samples.covariance()[0];
        let nf = n as f64;
        worst_z = worst_z.max((mean - m).abs() / (v / nf).sqrt());
        worst_z = worst_z.max((var - v).abs() / (v * (2.0 / (nf - 1.0)).sqrt()));
    }
    check(
        "linear_score_equivalence",
        4.0 - worst_z,
        format!("largest deviation {worst_z:.2} standard errors at n = {n}"),
    )
}

fn eps_score_check(opts: &ValidationOptions) -> crate::Result<CheckResult> {
    let schedule = Schedule::new(32, 2.0, 4.0)?;
    let target = mixture_2d();
    let exact = ExactProvider::new(&target, &schedule)?;
    let provider = PerturbedProvider::new(exact, PerturbationSpec::constant_bias(0.1, opts.seed))?;
    let est = estimate_eps_score(&provider, &target, &schedule, 200, opts.seed)?;
    let err = (est.value - 0.1).abs();
    check(
        "eps_score_constant_bias",
        1e-12 - err,
        format!("estimate {} for eps = 0.1", est.value),
    )
}

fn determinism(opts: &ValidationOptions) -> crate::Result<CheckResult> {
    let schedule = Schedule::new(64, 2.0, 4.0)?;
    let target: Target = atoms_2d().into();
    let provider = ExactProvider::new(&target, &schedule)?;
    let coeffs = SamplerCoefficients::lowdim(&schedule);
    let mut outputs = Vec::new();
    for workers in [1, 2, 8] {
        let run = with_workers(Some(workers), || {
            run_reverse(&provider, &schedule, &coeffs, 4000, opts.seed)
        })??;
        let fwd = with_workers(Some(workers), || {
            sample_forward(&target, &schedule, 10, 4000, opts.seed)
        })??;
        let bits: Vec<u64> = run
            .samples
            .as_slice()
            .iter()
            .chain(fwd.as_slice())
            .map(|v| v.to_bits())
            .collect();
        outputs.push(bits);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    check(
        "determinism_across_workers",
        if same { 0.0 } else { -1.0 },
        "reverse and forward draws with 1, 2 and 8 workers".into(),
    )
}
