//! Exact scores and posterior covariances of a two-component Gaussian mixture
//! along the forward process.

use ddpm_lab::targets::{posterior_stats, score_exact, GaussianComponent, GaussianMixtureTarget};
use ddpm_lab::{Schedule, Target};
use nalgebra::{DMatrix, DVector};

fn main() -> ddpm_lab::Result<()> {
    let target: Target = GaussianMixtureTarget::new(vec![
        GaussianComponent {
            weight: 0.4,
            mean: DVector::from_vec(vec![-1.5, 0.0]),
            cov: DMatrix::from_diagonal_element(2, 2, 0.2),
        },
        GaussianComponent {
            weight: 0.6,
            mean: DVector::from_vec(vec![1.5, 0.5]),
            cov: DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.2]),
        },
    ])?
    .into();
    let schedule = Schedule::new(200, 2.0, 4.0)?;
    let x = [0.2, 0.1];
    for t in [1, 20, 100, 200] {
        let s = score_exact(&target, &schedule, t, &x)?;
        let stats = posterior_stats(&target, &schedule, t, &x)?;
        let cov = DMatrix::identity(2, 2) - stats.jacobian;
        println!(
            "t {t:>3}  alpha_bar {:.4}  score [{:+.4}, {:+.4}]  eig(I - J) {:?}",
            schedule.alpha_bar(t),
            s[0],
            s[1],
            cov.symmetric_eigenvalues().as_slice()
        );
    }
    Ok(())
}
