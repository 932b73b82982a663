use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Ordinary least squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `y = slope * x + intercept`. Degenerate inputs (fewer
/// than two distinct `x`) give a zero slope through the mean.
pub fn ols(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len().min(ys.len()) as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Log-log rate fit over `(x, y)` points with positive coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
    /// Points left out of the fit (the smallest-`x` point when it was dropped).
    pub dropped: Vec<(f64, f64)>,
}

/// Fits `log y = slope * log x + intercept`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(LabError::TooFewRows(points.len()));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(LabError::InvalidArgument(format!(
            "rate fit needs positive coordinates, got ({}, {})",
            p.0, p.1
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = ols(&xs, &ys);
    Ok(RateFit {
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        points: points.to_vec(),
        dropped: Vec::new(),
    })
}

/// Like [`fit_rate`], but when `r^2` falls below `min_r_squared` the point
/// with the smallest `x` is dropped once and the fit repeated (provided at
/// least three points remain). The dropped point is reported.
pub fn fit_rate_dropping_smallest(points: &[(f64, f64)], min_r_squared: f64) -> Result<RateFit> {
    let fit = fit_rate(points)?;
    if fit.r_squared >= min_r_squared || points.len() < 4 {
        return Ok(fit);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = sorted.remove(0);
    let mut refit = fit_rate(&sorted)?;
    refit.points = points.to_vec();
    refit.dropped = vec![first];
    Ok(refit)
}
