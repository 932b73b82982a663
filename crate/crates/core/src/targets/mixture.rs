//! Forward marginals of Gaussian/point-mass mixtures.
//!
//! At step `t` every data component `(w, mu, Sigma)` becomes
//! `N(sqrt(ab) mu, ab Sigma + (1 - ab) I)`; point masses have `Sigma = 0` and
//! stay isotropic. All queries go through per-component log terms combined
//! with log-sum-exp.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{LabError, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

thread_local! {
    static SCRATCH: std::cell::RefCell<(Vec<f64>, Vec<f64>)> = const {
        std::cell::RefCell::new((Vec::new(), Vec::new()))
    };
}

/// One data component expressed in ambient coordinates.
#[derive(Debug, Clone)]
pub(crate) struct AmbientComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    /// `None` for a point mass.
    pub cov: Option<DMatrix<f64>>,
    /// Factor `F` with `F F^T = cov`, used for sampling.
    pub factor: Option<DMatrix<f64>>,
}

#[derive(Debug)]
enum Shape {
    Isotropic,
    Full {
        /// `C^{-1}` with `C = ab Sigma + (1 - ab) I`.
        precision: DMatrix<f64>,
        log_det: f64,
        /// `sqrt(ab) * Sigma`, the gain applied to `C^{-1}(x - m)` in the
        /// posterior mean of `X_0`.
        gain: DMatrix<f64>,
        /// `Cov[x - sqrt(ab) X_0 | X_t = x, component]`.
        residual_cov: DMatrix<f64>,
    },
}

#[derive(Debug)]
struct StepComponent {
    log_weight: f64,
    /// `sqrt(ab) * mu`
    mean: DVector<f64>,
    /// `mu`
    data_mean: DVector<f64>,
    shape: Shape,
}

/// Closed-form marginal of `X_t` at a fixed step.
#[derive(Debug)]
pub(crate) struct StepMarginal {
    t: usize,
    dim: usize,
    alpha_bar: f64,
    noise_var: f64,
    components: Vec<StepComponent>,
}

/// Conditional moments of the residual `x - sqrt(ab) X_0` given `X_t = x`.
pub(crate) struct ResidualMoments {
    pub mean: DVector<f64>,
    pub second: DMatrix<f64>,
    pub log_density: f64,
}

impl StepMarginal {
    pub fn new(
        components: &[AmbientComponent],
        dim: usize,
        t: usize,
        alpha_bar: f64,
    ) -> Result<Self> {
        let noise_var = 1.0 - alpha_bar;
        let sqrt_ab = alpha_bar.sqrt();
        let components = components
            .iter()
            .map(|c| {
                let shape = match &c.cov {
                    None => Shape::Isotropic,
                    Some(sigma) => {
                        let cov = sigma * alpha_bar + DMatrix::identity(dim, dim) * noise_var;
                        let chol = Cholesky::new(cov).ok_or_else(|| {
                            LabError::InvalidTarget(format!(
                                "marginal covariance at step {t} is not positive definite"
                            ))
                        })?;
                        let log_det = 2.0
                            * chol
                                .l_dirty()
                                .diagonal()
                                .iter()
                                .map(|v| v.ln())
                                .sum::<f64>();
                        let solved = chol.solve(sigma);
                        let mut residual_cov = (sigma - sigma * &solved * alpha_bar) * alpha_bar;
                        symmetrize(&mut residual_cov);
                        let mut precision = chol.inverse();
                        symmetrize(&mut precision);
                        Shape::Full {
                            precision,
                            log_det,
                            gain: sigma * sqrt_ab,
                            residual_cov,
                        }
                    }
                };
                Ok(StepComponent {
                    log_weight: c.weight.ln(),
                    mean: &c.mean * sqrt_ab,
                    data_mean: c.mean.clone(),
                    shape,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            dim,
            alpha_bar,
            noise_var,
            components,
        })
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Per-component `log w_i + log N(x; m_i, C_i)` plus the whitened
    /// direction `C_i^{-1}(x - m_i)` written into `directions` (row-major).
    fn log_terms(&self, x: &[f64], log_terms: &mut [f64], directions: &mut [f64]) {
        let d = self.dim;
        for (i, comp) in self.components.iter().enumerate() {
            let dir = &mut directions[i * d..(i + 1) * d];
            match &comp.shape {
                Shape::Isotropic => {
                    let mut quad = 0.0;
                    for k in 0..d {
                        let delta = x[k] - comp.mean[k];
                        quad += delta * delta;
                        dir[k] = delta / self.noise_var;
                    }
                    log_terms[i] = comp.log_weight
                        - 0.5 * (d as f64 * (LN_2PI + self.noise_var.ln()) + quad / self.noise_var);
                }
                Shape::Full {
                    precision, log_det, ..
                } => {
                    let mut quad = 0.0;
                    for k in 0..d {
                        let mut acc = 0.0;
                        for j in 0..d {
                            acc += precision[(k, j)] * (x[j] - comp.mean[j]);
                        }
                        dir[k] = acc;
                        quad += (x[k] - comp.mean[k]) * acc;
                    }
                    log_terms[i] = comp.log_weight - 0.5 * (d as f64 * LN_2PI + log_det + quad);
                }
            }
        }
    }

    /// Normalizes `log_terms` in place into responsibilities and returns the
    /// log-sum-exp.
    fn responsibilities(&self, log_terms: &mut [f64]) -> Result<f64> {
        let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(LabError::ResponsibilityUnderflow { t: self.t });
        }
        let mut sum = 0.0;
        for v in log_terms.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        if !(sum > 0.0) {
            return Err(LabError::ResponsibilityUnderflow { t: self.t });
        }
        for v in log_terms.iter_mut() {
            *v /= sum;
        }
        Ok(max + sum.ln())
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let mut terms = vec![0.0; self.components.len()];
        let mut dirs = vec![0.0; self.components.len() * self.dim];
        self.log_terms(x, &mut terms, &mut dirs);
        self.responsibilities(&mut terms)
    }

    /// `grad log p_{X_t}(x) = -sum_i r_i C_i^{-1}(x - m_i)`.
    pub fn score_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        SCRATCH.with(|cell| {
            let (terms, dirs) = &mut *cell.borrow_mut();
            self.score_with(x, out, terms, dirs)
        })
    }

    fn score_with(
        &self,
        x: &[f64],
        out: &mut [f64],
        terms: &mut Vec<f64>,
        dirs: &mut Vec<f64>,
    ) -> Result<()> {
        let k = self.components.len();
        let d = self.dim;
        terms.resize(k, 0.0);
        dirs.resize(k * d, 0.0);
        self.log_terms(x, terms, dirs);
        self.responsibilities(terms)?;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, r) in terms.iter().enumerate() {
            if *r == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(&dirs[i * d..(i + 1) * d]) {
                *o -= r * v;
            }
        }
        Ok(())
    }

    /// Conditional first and second moments of `x - sqrt(ab) X_0`, assembled
    /// from per-component posterior means `E[X_0 | x, i]`.
    pub fn residual_moments(&self, x: &[f64]) -> Result<ResidualMoments> {
        let k = self.components.len();
        let d = self.dim;
        let mut terms = vec![0.0; k];
        let mut dirs = vec![0.0; k * d];
        self.log_terms(x, &mut terms, &mut dirs);
        let log_density = self.responsibilities(&mut terms)?;
        let sqrt_ab = self.alpha_bar.sqrt();
        let xv = DVector::from_column_slice(x);
        let mut mean = DVector::zeros(d);
        let mut second = DMatrix::zeros(d, d);
        for (i, comp) in self.components.iter().enumerate() {
            let r = terms[i];
            if r == 0.0 {
                continue;
            }
            let dir = DVector::from_column_slice(&dirs[i * d..(i + 1) * d]);
            let post_mean_x0 = match &comp.shape {
                Shape::Isotropic => comp.data_mean.clone(),
                Shape::Full { gain, .. } => &comp.data_mean + gain * &dir,
            };
            let resid = &xv - post_mean_x0 * sqrt_ab;
            second.ger(r, &resid, &resid, 1.0);
            if let Shape::Full { residual_cov, .. } = &comp.shape {
                second += residual_cov * r;
            }
            mean.axpy(r, &resid, 1.0);
        }
        Ok(ResidualMoments {
            mean,
            second,
            log_density,
        })
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
