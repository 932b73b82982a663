use approx::assert_relative_eq;
use ddpm_lab::metrics::{
    fit_rate, kl_gaussians_1d, pinsker_check, tv_cells_times_isotropic, tv_gaussians_1d,
    tv_isotropic_gaussians,
};
use ddpm_lab::samplers::{DesignTag, GaussianOracle, SamplerCoefficients};
use ddpm_lab::targets::{posterior_stats, score_exact, Atom, PointMassMixtureTarget};
use ddpm_lab::{Schedule, Target};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn default_schedules_satisfy_every_bound(steps in 16usize..4096) {
        let s = Schedule::new(steps, 2.0, 4.0).unwrap();
        let report = s.validity_report();
        prop_assert!(report.all_passed(), "{:?}", report.failed().collect::<Vec<_>>());
        prop_assert!((s.beta(1) - (steps as f64).powi(-2)).abs() <= 1e-15);
        for t in 2..=steps {
            prop_assert!(s.alpha_bar(t) < s.alpha_bar(t - 1));
        }
    }

    #[test]
    fn tv_is_a_symmetric_probability(m1 in -3.0f64..3.0, m2 in -3.0f64..3.0, v1 in 0.05f64..5.0, v2 in 0.05f64..5.0) {
        let a = tv_gaussians_1d(m1, v1, m2, v2).unwrap();
        let b = tv_gaussians_1d(m2, v2, m1, v1).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(pinsker_check(a, kl_gaussians_1d(m1, v1, m2, v2).unwrap()));
    }

    #[test]
    fn isotropic_tv_grows_with_dimension(v1 in 0.2f64..3.0, v2 in 0.2f64..3.0, d in 1usize..12) {
        let one = tv_isotropic_gaussians(1, v1, v2).unwrap();
        prop_assert!((one - tv_gaussians_1d(0.0, v1, 0.0, v2).unwrap()).abs() < 1e-12);
        let lo = tv_isotropic_gaussians(d, v1, v2).unwrap();
        let hi = tv_isotropic_gaussians(d + 1, v1, v2).unwrap();
        prop_assert!(hi + 1e-12 >= lo);
    }

    #[test]
    fn cell_tv_reduces_to_cell_differences_with_equal_variances(
        a in proptest::collection::vec(0.01f64..1.0, 2..6), d in 0usize..6, v in 0.1f64..2.0
    ) {
        let total: f64 = a.iter().sum();
        let p: Vec<f64> = a.iter().map(|x| x / total).collect();
        let mut q = p.clone();
        q.rotate_left(1);
        let direct = 0.5 * p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum::<f64>();
        let tv = tv_cells_times_isotropic(&p, &q, d, v, v).unwrap();
        prop_assert!((tv - direct).abs() < 1e-12);
    }

    #[test]
    fn power_laws_are_fitted_exactly(slope in -2.0f64..2.0, scale in 0.01f64..10.0) {
        let points: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0].iter().map(|&x: &f64| (x, scale * x.powf(slope))).collect();
        let fit = fit_rate(&points).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn oracle_variance_stays_positive(steps in 8usize..512, var in 0.0f64..20.0) {
        let s = Schedule::new(steps, 2.0, 4.0).unwrap();
        for design in [DesignTag::DdpmStandard, DesignTag::DdpmLowdim, DesignTag::Ddim] {
            let coeffs = SamplerCoefficients::for_design(design, &s).unwrap();
            let (m, v) = GaussianOracle::centered(var).run(&s, &coeffs).unwrap();
            prop_assert!(m == 0.0);
            prop_assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn point_mass_posterior_is_psd_and_scores_are_finite(
        x in proptest::collection::vec(-4.0f64..4.0, 2), t in 1usize..128
    ) {
        let target: Target = PointMassMixtureTarget::new(vec![
            Atom { weight: 0.6, location: DVector::from_vec(vec![0.5, 0.0]) },
            Atom { weight: 0.4, location: DVector::from_vec(vec![-1.0, 1.0]) },
        ]).unwrap().into();
        let s = Schedule::new(128, 2.0, 4.0).unwrap();
        let score = score_exact(&target, &s, t, &x).unwrap();
        prop_assert!(score.iter().all(|v| v.is_finite()));
        let stats = posterior_stats(&target, &s, t, &x).unwrap();
        let cov = DMatrix::identity(2, 2) - stats.jacobian;
        prop_assert!(cov.symmetric_eigenvalues().min() >= -1e-8 * cov.norm().max(1.0));
    }
}

#[test]
fn too_few_steps_are_flagged() {
    let s = Schedule::new(4, 2.0, 4.0).unwrap();
    assert!(!s.validity_report().all_passed());
}

#[test]
fn ddim_halves_the_drift() {
    let s = Schedule::new(50, 2.0, 4.0).unwrap();
    let std = SamplerCoefficients::standard(&s);
    let ddim = SamplerCoefficients::ddim(&s);
    for t in 1..=50 {
        assert_relative_eq!(2.0 * ddim.eta(t), std.eta(t), max_relative = 1e-15);
        assert_eq!(ddim.sigma(t), 0.0);
    }
}
