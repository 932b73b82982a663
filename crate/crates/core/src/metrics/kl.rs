use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{LabError, Result};

/// KL between the two Gaussian reverse kernels of one step that share the
/// variance `(1 - alpha)/alpha` and differ only through the score:
/// `(1 - alpha)/2 * ||s_est - s_true||^2`.
pub fn kl_step_gaussian(s_est: &[f64], s_true: &[f64], alpha: f64) -> Result<f64> {
    if s_est.len() != s_true.len() {
        return Err(LabError::DimensionMismatch {
            expected: s_true.len(),
            got: s_est.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let sq: f64 = s_est
        .iter()
        .zip(s_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(0.5 * (1.0 - alpha) * sq)
}

/// `KL(N(mu1, cov) || N(mu2, cov)) = 1/2 (mu1 - mu2)^T cov^{-1} (mu1 - mu2)`.
pub fn kl_gaussians_same_cov(
    mu1: &DVector<f64>,
    mu2: &DVector<f64>,
    cov: &DMatrix<f64>,
) -> Result<f64> {
    if mu1.len() != mu2.len() || cov.nrows() != mu1.len() || cov.ncols() != mu1.len() {
        return Err(LabError::DimensionMismatch {
            expected: mu1.len(),
            got: cov.nrows(),
        });
    }
    let chol = Cholesky::new(cov.clone())
        .ok_or_else(|| LabError::InvalidArgument("covariance is not positive definite".into()))?;
    let delta = mu1 - mu2;
    Ok(0.5 * delta.dot(&chol.solve(&delta)))
}

/// `KL(N(m1, v1) || N(m2, v2))` on the line.
pub fn kl_gaussians_1d(m1: f64, v1: f64, m2: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(LabError::InvalidArgument(
            "variances must be positive".into(),
        ));
    }
    Ok(0.5 * ((v2 / v1).ln() + (v1 + (m1 - m2).powi(2)) / v2 - 1.0))
}

/// Pinsker's inequality `tv <= sqrt(kl / 2)` up to a `1e-12` slack.
pub fn pinsker_check(tv: f64, kl: f64) -> bool {
    tv <= (kl.max(0.0) / 2.0).sqrt() + 1e-12
}
