use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};

use super::*;

fn two_step(alpha_bar: f64) -> Schedule {
    Schedule::from_betas(vec![1.0 - alpha_bar, 0.5]).unwrap()
}

fn gaussian_mixture_2d() -> Target {
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
    .unwrap()
    .into()
}

fn atoms_2d() -> Target {
    PointMassMixtureTarget::new(vec![
        Atom {
            weight: 0.2,
            location: DVector::from_vec(vec![0.0, 0.0]),
        },
        Atom {
            weight: 0.5,
            location: DVector::from_vec(vec![1.5, 0.4]),
        },
        Atom {
            weight: 0.3,
            location: DVector::from_vec(vec![-0.7, 1.2]),
        },
    ])
    .unwrap()
    .into()
}

fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += h;
            dn[i] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1.0);
    diff / scale
}

#[test]
fn standard_gaussian_is_stationary() {
    let target = Target::standard_gaussian(3);
    let schedule = Schedule::new(64, 2.0, 4.0).unwrap();
    let x = [0.4, -1.3, 2.0];
    for t in [1, 10, 64] {
        let s = score_exact(&target, &schedule, t, &x).unwrap();
        for (si, xi) in s.iter().zip(&x) {
            assert_abs_diff_eq!(*si, -xi, epsilon = 1e-12);
        }
        let lp = marginal_log_density(&target, &schedule, t, &x).unwrap();
        let expected = -1.5 * (2.0 * PI).ln() - 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        assert_abs_diff_eq!(lp, expected, epsilon = 1e-12);

        // g = (1 - ab) x, so I - J = ab I
        let stats = posterior_stats(&target, &schedule, t, &x).unwrap();
        let ab = schedule.alpha_bar(t);
        let cov = DMatrix::identity(3, 3) - &stats.jacobian;
        assert!((cov - DMatrix::identity(3, 3) * ab).amax() < 1e-10);
    }
}

#[test]
fn single_point_mass_at_origin() {
    let target: Target = PointMassMixtureTarget::single(DVector::zeros(1))
        .unwrap()
        .into();
    let schedule = two_step(0.5);
    let lp = marginal_log_density(&target, &schedule, 1, &[0.0]).unwrap();
    assert_abs_diff_eq!(lp, (1.0 / (2.0 * PI * 0.5).sqrt()).ln(), epsilon = 1e-14);
    let s = score_exact(&target, &schedule, 1, &[0.7]).unwrap();
    assert_abs_diff_eq!(s[0], -0.7 / 0.5, epsilon = 1e-14);
    // the posterior of X_0 is a point, so the residual has no spread and J = I
    let stats = posterior_stats(&target, &schedule, 1, &[0.7]).unwrap();
    assert_abs_diff_eq!(stats.jacobian[(0, 0)], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(stats.g[0], 0.7, epsilon = 1e-14);
}

#[test]
fn mixture_density_matches_convolution_quadrature() {
    // 1-d Gaussian mixture convolved with the forward kernel, integrated directly
    let comps = [(0.4, -1.0, 0.3), (0.6, 2.0, 0.8)];
    let target: Target = GaussianMixtureTarget::new(
        comps
            .iter()
            .map(|&(w, m, v)| GaussianComponent {
                weight: w,
                mean: DVector::from_vec(vec![m]),
                cov: DMatrix::from_element(1, 1, v),
            })
            .collect(),
    )
    .unwrap()
    .into();
    let ab = 0.36;
    let schedule = two_step(ab);
    let n = 200_000;
    let (lo, hi) = (-15.0, 15.0);
    let h = (hi - lo) / n as f64;
    for &x in &[-2.0, 0.1, 1.7, 4.0] {
        let mut p = 0.0;
        for i in 0..n {
            let y = lo + (i as f64 + 0.5) * h;
            let prior: f64 = comps
                .iter()
                .map(|&(w, m, v)| w * (-(y - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt())
                .sum();
            let kernel = (-(x - ab.sqrt() * y).powi(2) / (2.0 * (1.0 - ab))).exp()
                / (2.0 * PI * (1.0 - ab)).sqrt();
            p += prior * kernel * h;
        }
        let lp = marginal_log_density(&target, &schedule, 1, &[x]).unwrap();
        assert_abs_diff_eq!(lp, p.ln(), epsilon = 1e-9);
    }
}

#[test]
fn scores_match_finite_differences() {
    let schedule = Schedule::new(128, 2.0, 4.0).unwrap();
    let points = [[0.3, -0.2], [1.4, 0.5], [-2.0, 1.0]];
    for target in [gaussian_mixture_2d(), atoms_2d()] {
        for t in [2, 40, 128] {
            for x in &points {
                let s = score_exact(&target, &schedule, t, x).unwrap();
                let fd = fd_gradient(
                    |y| marginal_log_density(&target, &schedule, t, y).unwrap(),
                    x,
                    1e-5,
                );
                assert!(rel_err(&s, &fd) < 1e-5, "t={t} x={x:?}: {s:?} vs {fd:?}");
            }
        }
    }
}

#[test]
fn jacobian_matches_finite_differences_and_is_psd() {
    let schedule = Schedule::new(128, 2.0, 4.0).unwrap();
    let points = [[0.3, -0.2], [1.4, 0.5], [-2.0, 1.0]];
    for target in [gaussian_mixture_2d(), atoms_2d()] {
        for t in [5, 40, 128] {
            let nv = 1.0 - schedule.alpha_bar(t);
            for x in &points {
                let stats = posterior_stats(&target, &schedule, t, x).unwrap();
                // g = -(1 - ab) s
                let s = score_exact(&target, &schedule, t, x).unwrap();
                for (gi, si) in stats.g.iter().zip(&s) {
                    assert_abs_diff_eq!(*gi, -nv * si, epsilon = 1e-10 * (1.0 + si.abs()));
                }
                for j in 0..2 {
                    let col = fd_gradient(
                        |y| -nv * score_exact(&target, &schedule, t, y).unwrap()[j],
                        x,
                        1e-5,
                    );
                    let row: Vec<f64> = (0..2).map(|k| stats.jacobian[(j, k)]).collect();
                    assert!(
                        rel_err(&row, &col) < 1e-5,
                        "t={t} x={x:?}: {row:?} vs {col:?}"
                    );
                }
                let cov = DMatrix::identity(2, 2) - &stats.jacobian;
                assert!((&cov - cov.transpose()).amax() < 1e-12);
                assert!(cov.symmetric_eigenvalues().min() > -1e-10);
            }
        }
    }
}

#[test]
fn out_of_range_steps_and_bad_points_are_rejected() {
    let schedule = Schedule::new(16, 2.0, 4.0).unwrap();
    let target = Target::standard_gaussian(2);
    assert!(score_exact(&target, &schedule, 0, &[0.0, 0.0]).is_err());
    assert!(score_exact(&target, &schedule, 17, &[0.0, 0.0]).is_err());
    assert!(score_exact(&target, &schedule, 3, &[0.0]).is_err());
    assert!(score_exact(&target, &schedule, 3, &[f64::NAN, 0.0]).is_err());
}

#[test]
fn forward_samples_have_the_right_moments() {
    let target: Target = GaussianMixtureTarget::new(vec![
        GaussianComponent {
            weight: 0.25,
            mean: DVector::from_vec(vec![-2.0]),
            cov: DMatrix::from_element(1, 1, 0.5),
        },
        GaussianComponent {
            weight: 0.75,
            mean: DVector::from_vec(vec![1.0]),
            cov: DMatrix::from_element(1, 1, 0.2),
        },
    ])
    .unwrap()
    .into();
    let schedule = Schedule::new(64, 2.0, 4.0).unwrap();
    let t = 20;
    let ab = schedule.alpha_bar(t);
    let n = 100_000;
    let x = sample_forward(&target, &schedule, t, n, 17).unwrap();
    let m0 = 0.25 * -2.0 + 0.75 * 1.0;
    let v0 = 0.25 * (0.5 + 4.0) + 0.75 * (0.2 + 1.0) - m0 * m0;
    let mean = ab.sqrt() * m0;
    let var = ab * v0 + 1.0 - ab;
    let se_mean = (var / n as f64).sqrt();
    assert!((x.mean()[0] - mean).abs() < 4.0 * se_mean);
    // variance SE under a kurtosis allowance of 3
    let se_var = var * (2.0 * 3.0 / n as f64).sqrt();
    assert!((x.covariance()[0] - var).abs() < 4.0 * se_var);
}

#[test]
fn forward_sampling_is_deterministic_and_prefix_stable() {
    let target = atoms_2d();
    let schedule = Schedule::new(32, 2.0, 4.0).unwrap();
    let a = sample_forward(&target, &schedule, 7, 500, 3).unwrap();
    let b = sample_forward(&target, &schedule, 7, 500, 3).unwrap();
    assert_eq!(a, b);
    let c = sample_forward(&target, &schedule, 7, 50, 3).unwrap();
    assert_eq!(&a.as_slice()[..100], c.as_slice());
    let other = sample_forward(&target, &schedule, 7, 500, 4).unwrap();
    assert_ne!(a, other);
}

#[test]
fn data_samples_reproduce_mixture_covariance() {
    let target = gaussian_mixture_2d();
    let TargetModel::GaussianMixture(g) = target.model() else {
        unreachable!()
    };
    let expected = g.covariance();
    let n = 200_000;
    let mut rng = rng::stream(9, Domain::Validation, 0);
    let mut data = SampleMatrix::zeros(n, 2);
    for i in 0..n {
        target.sample_data(&mut rng, data.row_mut(i));
    }
    let cov = data.covariance();
    for (i, c) in cov.iter().enumerate() {
        let e = expected[(i / 2, i % 2)];
        assert!((c - e).abs() < 0.02, "entry {i}: {c} vs {e}");
    }
}

#[test]
fn embedded_score_factorizes_through_the_subspace() {
    let base = BaseTarget::PointMasses(
        PointMassMixtureTarget::new(vec![
            Atom {
                weight: 0.6,
                location: DVector::from_vec(vec![0.2, 0.0]),
            },
            Atom {
                weight: 0.4,
                location: DVector::from_vec(vec![-0.5, 0.9]),
            },
        ])
        .unwrap(),
    );
    let embedded = EmbeddedTarget::with_random_embedding(base.clone(), 6, 12).unwrap();
    let target = Target::from(embedded.clone());
    let schedule = Schedule::new(64, 2.0, 4.0).unwrap();
    let x = [0.3, -0.4, 1.1, 0.0, -0.9, 0.5];
    for t in [3, 30, 64] {
        let direct = score_exact(&target, &schedule, t, &x).unwrap();
        let via = embedded.score_via_subspace(&schedule, t, &x).unwrap();
        assert!(rel_err(&direct, &via) < 1e-10);
        let fd = fd_gradient(
            |y| marginal_log_density(&target, &schedule, t, y).unwrap(),
            &x,
            1e-5,
        );
        assert!(rel_err(&direct, &fd) < 1e-5);

        // density = base density of the projection times the normal Gaussian
        let ab = schedule.alpha_bar(t);
        let (along, normal) = embedded.split(&x, ab);
        let base_lp =
            marginal_log_density(&Target::from(base.clone()), &schedule, t, along.as_slice())
                .unwrap();
        let normal_lp =
            -0.5 * 4.0 * (2.0 * PI * (1.0 - ab)).ln() - normal.norm_squared() / (2.0 * (1.0 - ab));
        let lp = marginal_log_density(&target, &schedule, t, &x).unwrap();
        assert_abs_diff_eq!(lp, base_lp + normal_lp, epsilon = 1e-10);
    }
}

#[test]
fn embedding_validation() {
    let base = BaseTarget::PointMasses(PointMassMixtureTarget::single(DVector::zeros(2)).unwrap());
    assert!(EmbeddedTarget::new(base.clone(), DMatrix::identity(2, 2), DVector::zeros(2)).is_err());
    let skew = DMatrix::from_row_slice(3, 2, &[1.0, 0.1, 0.0, 1.0, 0.0, 0.0]);
    assert!(EmbeddedTarget::new(base.clone(), skew, DVector::zeros(3)).is_err());
    let e = random_orthonormal(7, 3, 1);
    assert!((e.transpose() * &e - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
}

#[test]
fn invalid_mixtures_are_rejected() {
    let comp = |w: f64| GaussianComponent {
        weight: w,
        mean: DVector::zeros(1),
        cov: DMatrix::identity(1, 1),
    };
    assert!(GaussianMixtureTarget::new(vec![comp(0.5), comp(0.4)]).is_err());
    assert!(GaussianMixtureTarget::new(vec![]).is_err());
    assert!(GaussianMixtureTarget::new(vec![GaussianComponent {
        weight: 1.0,
        mean: DVector::zeros(1),
        cov: DMatrix::zeros(1, 1),
    }])
    .is_err());
    assert!(PointMassMixtureTarget::new(vec![Atom {
        weight: -0.5,
        location: DVector::zeros(1),
    }])
    .is_err());
}
