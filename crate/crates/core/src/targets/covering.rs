//! Greedy epsilon-nets and the covering-number slope estimate of intrinsic
//! dimension.

use rand::Rng;

use crate::error::{LabError, Result};
use crate::metrics::ols;
use crate::rng::{self, Domain};
use crate::samples::SampleMatrix;

use super::random_orthonormal;

/// Size of a greedy `eps`-net: scan points in order, promote each point not yet
/// within `eps` of a center to a center.
///
/// Centers are pairwise more than `eps` apart and cover every point, so the
/// count lies between the minimal covering number at radius `eps` and the
/// packing number at radius `eps / 2`.
pub fn covering_number(points: &SampleMatrix, eps: f64) -> Result<usize> {
    if points.rows() == 0 {
        return Err(LabError::InvalidArgument("point set is empty".into()));
    }
    if !(eps > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let eps2 = eps * eps;
    let mut uncovered: Vec<usize> = (0..points.rows()).collect();
    let mut centers = 0;
    while let Some(&first) = uncovered.first() {
        centers += 1;
        let c = points.row(first);
        uncovered.retain(|&i| {
            let p = points.row(i);
            let mut d2 = 0.0;
            for (a, b) in p.iter().zip(c) {
                let diff = a - b;
                d2 += diff * diff;
                if d2 > eps2 {
                    return true;
                }
            }
            false
        });
    }
    Ok(centers)
}

/// Least-squares slope of `log N_eps` against `log(1 / eps)`.
pub fn intrinsic_dimension_estimate(points: &SampleMatrix, eps_grid: &[f64]) -> Result<f64> {
    if eps_grid.len() < 3 {
        return Err(LabError::InvalidArgument(format!(
            "eps grid needs at least 3 values, got {}",
            eps_grid.len()
        )));
    }
    if eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(LabError::InvalidArgument(
            "eps grid must be strictly decreasing".into(),
        ));
    }
    let mut xs = Vec::with_capacity(eps_grid.len());
    let mut ys = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        xs.push((1.0 / eps).ln());
        ys.push((covering_number(points, eps)? as f64).ln());
    }
    Ok(ols(&xs, &ys).slope)
}

/// `n` uniform points on the flat `k`-torus `(S^1_radius)^k`, embedded
/// isometrically in `R^{2k}` and rotated into `R^d` by a random orthonormal map.
pub fn torus_cloud(k: usize, d: usize, radius: f64, n: usize, seed: u64) -> Result<SampleMatrix> {
    if k == 0 || 2 * k > d {
        return Err(LabError::InvalidArgument(format!(
            "a {k}-torus needs 1 <= 2k <= d, got d = {d}"
        )));
    }
    let embed = random_orthonormal(d, 2 * k, rng::mix(seed, 0x70_72));
    let mut rng = rng::stream(seed, Domain::Cloud, 0);
    let mut out = SampleMatrix::zeros(n, d);
    let mut flat = vec![0.0; 2 * k];
    for i in 0..n {
        for j in 0..k {
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            flat[2 * j] = radius * theta.cos();
            flat[2 * j + 1] = radius * theta.sin();
        }
        let row = out.row_mut(i);
        for (r, v) in row.iter_mut().enumerate() {
            *v = (0..2 * k).map(|c| embed[(r, c)] * flat[c]).sum();
        }
    }
    Ok(out)
}
