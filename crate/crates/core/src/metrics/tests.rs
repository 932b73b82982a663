use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};

use super::*;
use crate::rng::{self, Domain};
use crate::samples::SampleMatrix;

fn normal_pdf(x: f64, m: f64, v: f64) -> f64 {
    (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

/// Brute-force `1/2 int |p - q|` with a fine midpoint rule.
fn tv_quadrature_1d(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    let (lo, hi) = (-40.0, 40.0);
    let n = 400_000;
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * h;
            (normal_pdf(x, m1, v1) - normal_pdf(x, m2, v2)).abs()
        })
        .sum::<f64>()
        * h
        * 0.5
}

fn gaussian_samples(n: usize, d: usize, mean: f64, sd: f64, seed: u64) -> SampleMatrix {
    let mut rng = rng::stream(seed, Domain::Validation, 0);
    let mut data = vec![0.0; n * d];
    rng::fill_normal(&mut rng, &mut data);
    data.iter_mut().for_each(|v| *v = mean + sd * *v);
    SampleMatrix::from_vec(n, d, data).unwrap()
}

#[test]
fn identical_gaussians_have_zero_tv() {
    assert_eq!(tv_gaussians_1d(0.3, 2.0, 0.3, 2.0).unwrap(), 0.0);
    assert_eq!(tv_isotropic_gaussians(5, 1.5, 1.5).unwrap(), 0.0);
}

#[test]
fn unit_shift_matches_closed_form() {
    // 2 Phi(1/2) - 1
    assert_abs_diff_eq!(
        tv_gaussians_1d(0.0, 1.0, 1.0, 1.0).unwrap(),
        0.382_924_922_548_026,
        epsilon = 1e-12
    );
}

#[test]
fn crossing_point_formula_matches_quadrature() {
    for &(m1, v1, m2, v2) in &[
        (0.0, 1.0, 0.0, 2.0),
        (0.0, 2.0, 0.0, 1.0),
        (0.4, 0.7, -1.1, 3.0),
        (2.0, 0.05, 2.1, 0.06),
        (-3.0, 5.0, 1.0, 0.5),
    ] {
        let exact = tv_gaussians_1d(m1, v1, m2, v2).unwrap();
        let brute = tv_quadrature_1d(m1, v1, m2, v2);
        assert_abs_diff_eq!(exact, brute, epsilon = 1e-8);
        // symmetric in its arguments
        assert_abs_diff_eq!(
            exact,
            tv_gaussians_1d(m2, v2, m1, v1).unwrap(),
            epsilon = 1e-14
        );
    }
}

#[test]
fn rejects_nonpositive_variance() {
    assert!(tv_gaussians_1d(0.0, 0.0, 0.0, 1.0).is_err());
    assert!(tv_gaussians_1d(0.0, 1.0, 0.0, -1.0).is_err());
    assert!(tv_isotropic_gaussians(2, 0.0, 1.0).is_err());
}

#[test]
fn isotropic_tv_reduces_to_line_and_matches_radial_quadrature() {
    assert_abs_diff_eq!(
        tv_isotropic_gaussians(1, 1.0, 1.7).unwrap(),
        tv_gaussians_1d(0.0, 1.0, 0.0, 1.7).unwrap(),
        epsilon = 1e-12
    );
    // in the plane: 1/2 int |p - q| 2 pi r dr
    let (v1, v2) = (0.8, 1.3);
    let n = 200_000;
    let h = 30.0 / n as f64;
    let brute: f64 = (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            let p = (-r * r / (2.0 * v1)).exp() / (2.0 * PI * v1);
            let q = (-r * r / (2.0 * v2)).exp() / (2.0 * PI * v2);
            (p - q).abs() * 2.0 * PI * r
        })
        .sum::<f64>()
        * h
        * 0.5;
    assert_abs_diff_eq!(
        tv_isotropic_gaussians(2, v1, v2).unwrap(),
        brute,
        epsilon = 1e-8
    );
}

#[test]
fn cell_product_tv_limits() {
    // one cell reduces to the isotropic formula
    assert_abs_diff_eq!(
        tv_cells_times_isotropic(&[1.0], &[1.0], 3, 1.0, 1.4).unwrap(),
        tv_isotropic_gaussians(3, 1.0, 1.4).unwrap(),
        epsilon = 1e-12
    );
    // equal normal laws reduce to the discrete TV
    assert_abs_diff_eq!(
        tv_cells_times_isotropic(&[0.5, 0.3, 0.2], &[0.4, 0.4, 0.2], 4, 1.0, 1.0).unwrap(),
        0.1,
        epsilon = 1e-12
    );
}

#[test]
fn cell_product_tv_matches_radial_quadrature() {
    let (a, b) = ([0.6, 0.4], [0.5, 0.5]);
    let (v1, v2) = (1.0, 1.2);
    // dimension 2: radial density of the squared radius is exponential
    let n = 400_000;
    let h = 80.0 / n as f64;
    let mut brute = 0.0;
    for c in 0..2 {
        for i in 0..n {
            let s = (i as f64 + 0.5) * h;
            let f = (-s / (2.0 * v1)).exp() / (2.0 * v1);
            let g = (-s / (2.0 * v2)).exp() / (2.0 * v2);
            brute += (a[c] * f - b[c] * g).abs() * h;
        }
    }
    brute *= 0.5;
    assert_abs_diff_eq!(
        tv_cells_times_isotropic(&a, &b, 2, v1, v2).unwrap(),
        brute,
        epsilon = 1e-7
    );
}

#[test]
fn grid_tv_tracks_exact_tv_for_a_shift() {
    let n = 200_000;
    let samples = gaussian_samples(n, 1, 0.5, 1.0, 11);
    let density = |x: &[f64]| -0.5 * x[0] * x[0] - 0.5 * (2.0 * PI).ln();
    let grid = GridSpec::around(&[0.0], &[1.0], n).unwrap();
    let est = tv_grid(&samples, &density, &grid).unwrap();
    let exact = tv_gaussians_1d(0.5, 1.0, 0.0, 1.0).unwrap();
    let floor_est = tv_grid(&gaussian_samples(n, 1, 0.0, 1.0, 12), &density, &grid).unwrap();
    assert_eq!(est.method, TvMethod::Grid1d);
    assert!(floor_est.value < 0.01, "floor {}", floor_est.value);
    assert!(
        (est.value - exact).abs() < 3.0 * floor_est.value.max(0.005),
        "{} vs {exact}",
        est.value
    );
    assert!(est.stderr.unwrap() > 0.0);
}

#[test]
fn grid_tv_in_the_plane() {
    let n = 100_000;
    let samples = gaussian_samples(n, 2, 0.0, 1.0, 21);
    let density = |x: &[f64]| -0.5 * (x[0] * x[0] + x[1] * x[1]) - (2.0 * PI).ln();
    let grid = GridSpec::new(vec![-6.0, -6.0], vec![6.0, 6.0], 0.5).unwrap();
    let est = tv_grid(&samples, &density, &grid).unwrap();
    assert_eq!(est.method, TvMethod::Grid2d);
    assert_eq!(est.resolution.cells, 24 * 24);
    assert!(est.value < 0.03, "{}", est.value);
}

#[test]
fn narrow_grid_is_rejected() {
    let samples = gaussian_samples(100, 1, 0.0, 1.0, 3);
    let density = |x: &[f64]| -0.5 * x[0] * x[0] - 0.5 * (2.0 * PI).ln();
    let grid = GridSpec::new(vec![-2.0], vec![2.0], 0.1).unwrap();
    match tv_grid(&samples, &density, &grid) {
        Err(crate::error::LabError::GridCoverage { missing, .. }) => assert!(missing > 0.04),
        other => panic!("expected a coverage error, got {other:?}"),
    }
    assert!(GridSpec::new(vec![0.0, 0.0, 0.0], vec![1.0; 3], 0.1).is_err());
    assert!(GridSpec::new(vec![0.0], vec![1.0], 0.0).is_err());
}

#[test]
fn sliced_tv_matches_direction_average_of_exact_tvs() {
    let (n, d, shift) = (100_000, 3, 1.0);
    let reference = gaussian_samples(n, d, 0.0, 1.0, 31);
    let mut shifted = gaussian_samples(n, d, 0.0, 1.0, 32);
    for i in 0..n {
        shifted.row_mut(i)[0] += shift;
    }
    let directions = 24;
    let seed = 5;
    let est = tv_sliced(&shifted, &reference, directions, seed).unwrap();
    // same directions, exact projected TVs
    let mut expected = 0.0;
    for j in 0..directions {
        let mut r = rng::stream(seed, Domain::Direction, j as u64);
        let u = unit_vector(d, &mut r);
        expected += tv_gaussians_1d(shift * u[0], 1.0, 0.0, 1.0).unwrap();
    }
    expected /= directions as f64;
    let noise = tv_sliced(
        &gaussian_samples(n, d, 0.0, 1.0, 33),
        &reference,
        directions,
        seed,
    )
    .unwrap()
    .value;
    assert!(
        (est.value - expected).abs() < 3.0 * noise + 0.005,
        "{} vs {expected}",
        est.value
    );
    assert_eq!(est.resolution.slices, Some(directions));
}

#[test]
fn step_kl_agrees_with_general_gaussian_kl() {
    let alpha: f64 = 0.97;
    let x = [0.3, -1.2, 0.8];
    let s_true = [-0.1, 0.4, 0.2];
    let s_est = [0.05, 0.3, -0.25];
    let var = (1.0 - alpha) / alpha;
    let mean = |s: &[f64]| {
        DVector::from_iterator(
            3,
            x.iter()
                .zip(s)
                .map(|(xi, si)| (xi + (1.0 - alpha) * si) / alpha.sqrt()),
        )
    };
    let general = kl_gaussians_same_cov(
        &mean(&s_est),
        &mean(&s_true),
        &(DMatrix::identity(3, 3) * var),
    )
    .unwrap();
    assert_abs_diff_eq!(
        kl_step_gaussian(&s_est, &s_true, alpha).unwrap(),
        general,
        epsilon = 1e-14
    );
    assert!(kl_step_gaussian(&s_est, &s_true[..2], alpha).is_err());
    assert!(kl_step_gaussian(&s_est, &s_true, 1.0).is_err());
}

#[test]
fn pinsker_holds_for_gaussian_pairs() {
    for &(m1, v1, m2, v2) in &[
        (0.0, 1.0, 1.0, 1.0),
        (0.0, 1.0, 0.0, 3.0),
        (1.0, 0.2, -1.0, 0.4),
    ] {
        let tv = tv_gaussians_1d(m1, v1, m2, v2).unwrap();
        let kl = kl_gaussians_1d(m1, v1, m2, v2).unwrap();
        assert!(pinsker_check(tv, kl));
    }
    assert!(!pinsker_check(0.5, 0.1));
}

#[test]
fn rate_fit_recovers_power_law() {
    let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0]
        .iter()
        .map(|&t: &f64| (t, 3.0 * t.powf(-0.9)))
        .collect();
    let fit = fit_rate(&pts).unwrap();
    assert_abs_diff_eq!(fit.slope, -0.9, epsilon = 1e-12);
    assert_abs_diff_eq!(fit.intercept, 3.0_f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    assert!(fit.dropped.is_empty());
    assert!(fit_rate(&pts[..2]).is_err());
    assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
}

#[test]
fn rate_fit_drops_an_outlying_first_point_once() {
    let mut pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0, 256.0]
        .iter()
        .map(|&t: &f64| (t, t.powf(-1.0)))
        .collect();
    pts[0].1 = 10.0;
    let fit = fit_rate_dropping_smallest(&pts, 0.98).unwrap();
    assert_eq!(fit.dropped, vec![(16.0, 10.0)]);
    assert_abs_diff_eq!(fit.slope, -1.0, epsilon = 1e-12);
    assert_eq!(fit.points.len(), 5);
}
