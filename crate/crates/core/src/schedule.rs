//! Variance schedule `beta_t`, `alpha_t = 1 - beta_t` and `alpha_bar_t = prod_{i<=t} alpha_i`.
//!
//! Step indices are 1-based everywhere in the public API and in file output:
//! `beta(1)` is the first (smallest) noise level and `alpha_bar(steps())` the
//! last cumulative signal factor.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default schedule exponent: `beta_1 = T^{-c0}`.
pub const DEFAULT_C0: f64 = 2.0;
/// Default schedule rate constant.
pub const DEFAULT_C1: f64 = 4.0;

/// Discretization schedule of the forward process.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    steps: usize,
    constants: Option<(f64, f64)>,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
}

impl Schedule {
    /// Builds the geometric-then-flat schedule
    /// `beta_1 = T^{-c0}`, `beta_{t+1} = (c1 log T / T) * min(beta_1 (1 + c1 log T / T)^t, 1)`.
    ///
    /// The arrays are produced even when `T` is too small for every `beta_t` to
    /// land in `(0, 1)`; [`Schedule::validity_report`] flags that case and the
    /// samplers refuse such schedules via [`Schedule::ensure_usable`].
    pub fn new(steps: usize, c0: f64, c1: f64) -> Result<Self> {
        if steps < 2 {
            return Err(LabError::InvalidSchedule(format!(
                "step count must be at least 2, got {steps}"
            )));
        }
        if !(c0 > 0.0 && c0.is_finite()) || !(c1 > 0.0 && c1.is_finite()) {
            return Err(LabError::InvalidSchedule(format!(
                "constants must be positive and finite, got c0={c0}, c1={c1}"
            )));
        }
        let t_f = steps as f64;
        let rate = c1 * t_f.ln() / t_f;
        let beta1 = t_f.powf(-c0);
        let mut beta = Vec::with_capacity(steps);
        beta.push(beta1);
        let mut growth = 1.0;
        for _ in 1..steps {
            growth *= 1.0 + rate;
            beta.push(rate * (beta1 * growth).min(1.0));
        }
        let mut schedule = Self::from_parts(beta);
        schedule.constants = Some((c0, c1));
        Ok(schedule)
    }

    /// Explicit schedule from a user-supplied `beta` array.
    pub fn from_betas(beta: Vec<f64>) -> Result<Self> {
        if beta.len() < 2 {
            return Err(LabError::InvalidSchedule(format!(
                "need at least 2 steps, got {}",
                beta.len()
            )));
        }
        if let Some((i, b)) = beta
            .iter()
            .enumerate()
            .find(|(_, b)| !(**b > 0.0 && **b < 1.0))
        {
            return Err(LabError::InvalidSchedule(format!(
                "beta_{} = {b} is outside (0, 1)",
                i + 1
            )));
        }
        Ok(Self::from_parts(beta))
    }

    fn from_parts(beta: Vec<f64>) -> Self {
        let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
        let alpha_bar = running_product(&alpha);
        Self {
            steps: beta.len(),
            constants: None,
            beta,
            alpha,
            alpha_bar,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `(c0, c1)` when built from constants, `None` for explicit schedules.
    pub fn constants(&self) -> Option<(f64, f64)> {
        self.constants
    }

    pub fn c1(&self) -> Option<f64> {
        self.constants.map(|(_, c1)| c1)
    }

    #[inline]
    pub fn beta(&self, t: usize) -> f64 {
        self.beta[t - 1]
    }

    #[inline]
    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }

    #[inline]
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t - 1]
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub fn check_step(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps {
            Err(LabError::StepOutOfRange {
                t,
                steps: self.steps,
            })
        } else {
            Ok(())
        }
    }

    /// Errors unless every `beta_t` lies in `(0, 1)`.
    pub fn ensure_usable(&self) -> Result<()> {
        match self
            .beta
            .iter()
            .enumerate()
            .find(|(_, b)| !(**b > 0.0 && **b < 1.0))
        {
            Some((i, b)) => Err(LabError::InvalidSchedule(format!(
                "beta_{} = {b} is outside (0, 1); increase T or lower c1",
                i + 1
            ))),
            None => Ok(()),
        }
    }

    pub fn validity_report(&self) -> ValidityReport {
        check_schedule_arrays(self.c1(), &self.beta, &self.alpha, &self.alpha_bar)
    }

    /// CSV dump: `t,beta,alpha,alphabar`, one row per step, shortest
    /// round-trip decimal representation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,beta,alpha,alphabar")?;
        for t in 1..=self.steps {
            writeln!(
                out,
                "{t},{:?},{:?},{:?}",
                self.beta(t),
                self.alpha(t),
                self.alpha_bar(t)
            )?;
        }
        Ok(())
    }
}

/// Running product accumulated in double-double arithmetic; each stored value
/// is the correctly rounded accumulator.
fn running_product(factors: &[f64]) -> Vec<f64> {
    let mut hi = 1.0_f64;
    let mut lo = 0.0_f64;
    factors
        .iter()
        .map(|&a| {
            let p = hi * a;
            let err = hi.mul_add(a, -p);
            let lo_next = lo.mul_add(a, err);
            let s = p + lo_next;
            lo = lo_next - (s - p);
            hi = s;
            hi
        })
        .collect()
}

/// Outcome of one schedule inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Worst-case slack; non-negative when the inequality holds (zero for
    /// equalities that hold exactly).
    pub margin: f64,
    /// 1-based step where the worst margin occurs.
    pub worst_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const CHECK_BETA_RANGE: &str = "beta_in_unit_interval";
pub const CHECK_ALPHA_DEFINITION: &str = "alpha_equals_one_minus_beta";
pub const CHECK_ALPHA_BAR_DECREASING: &str = "alpha_bar_strictly_decreasing";
pub const CHECK_ALPHA_LOWER: &str = "alpha_lower_bound";
pub const CHECK_RATIO_BAR: &str = "one_minus_alpha_over_one_minus_alpha_bar";
pub const CHECK_RATIO_GAP: &str = "one_minus_alpha_over_alpha_minus_alpha_bar";
pub const CHECK_ALPHA_BAR_FINAL: &str = "alpha_bar_final_bound";

/// Evaluates every schedule inequality on raw arrays. Never fails: a violated
/// inequality is reported with a negative margin.
///
/// The step-size bounds (`alpha_t >= 1 - c1 log T / T`, the two ratio bounds
/// `<= 8 c1 log T / T` for `t >= 2`, and `0 < alpha_bar_T <= T^{-c1/2}`) are
/// only evaluated when `c1` is known.
pub fn check_schedule_arrays(
    c1: Option<f64>,
    beta: &[f64],
    alpha: &[f64],
    alpha_bar: &[f64],
) -> ValidityReport {
    let steps = beta.len();
    let mut checks = Vec::new();

    let (margin, worst) = worst_of(beta.iter().map(|&b| b.min(1.0 - b)));
    checks.push(CheckOutcome {
        name: CHECK_BETA_RANGE.into(),
        passed: margin > 0.0,
        margin,
        worst_step: worst,
    });

    let (margin, worst) = worst_of(
        beta.iter()
            .zip(alpha)
            .map(|(&b, &a)| -(a - (1.0 - b)).abs()),
    );
    checks.push(CheckOutcome {
        name: CHECK_ALPHA_DEFINITION.into(),
        passed: margin == 0.0,
        margin,
        worst_step: worst,
    });

    let (margin, worst) = worst_of(alpha_bar.windows(2).map(|w| w[0] - w[1]));
    checks.push(CheckOutcome {
        name: CHECK_ALPHA_BAR_DECREASING.into(),
        passed: margin > 0.0,
        margin,
        worst_step: worst.map(|i| i + 1),
    });

    if let Some(c1) = c1 {
        let t_f = steps as f64;
        let rate = c1 * t_f.ln() / t_f;

        let (margin, worst) = worst_of(alpha.iter().map(|&a| a - (1.0 - rate)));
        checks.push(CheckOutcome {
            name: CHECK_ALPHA_LOWER.into(),
            passed: margin >= 0.0,
            margin,
            worst_step: worst,
        });

        let bound = 8.0 * rate;
        let (margin, worst) =
            worst_of((1..steps).map(|i| bound - (1.0 - alpha[i]) / (1.0 - alpha_bar[i])));
        checks.push(CheckOutcome {
            name: CHECK_RATIO_BAR.into(),
            passed: margin >= 0.0,
            margin,
            worst_step: worst.map(|i| i + 1),
        });

        let (margin, worst) =
            worst_of((1..steps).map(|i| bound - (1.0 - alpha[i]) / (alpha[i] - alpha_bar[i])));
        checks.push(CheckOutcome {
            name: CHECK_RATIO_GAP.into(),
            passed: margin >= 0.0,
            margin,
            worst_step: worst.map(|i| i + 1),
        });

        let last = alpha_bar[steps - 1];
        let margin = (t_f.powf(-c1 / 2.0) - last).min(last);
        checks.push(CheckOutcome {
            name: CHECK_ALPHA_BAR_FINAL.into(),
            passed: margin >= 0.0,
            margin,
            worst_step: Some(steps),
        });
    }

    ValidityReport { checks }
}

/// Minimum of the slacks with its 1-based position. NaN counts as a violation.
fn worst_of(values: impl Iterator<Item = f64>) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for (i, v) in values.enumerate() {
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if v < best.0 {
            best = (v, Some(i + 1));
        }
    }
    if best.1.is_none() {
        (0.0, None)
    } else {
        best
    }
}
