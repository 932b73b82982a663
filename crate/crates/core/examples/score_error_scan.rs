//! Excess TV caused by a constant score bias, from the closed-form oracle.

use ddpm_lab::harness::{run_score_error_scan, ExperimentSpec, TargetFamily, TvChoice};
use ddpm_lab::scores::PerturbationSpec;

fn main() -> ddpm_lab::Result<()> {
    let mut spec = ExperimentSpec::new(
        "score-error-example",
        TargetFamily::Gaussian {
            dim: 1,
            variance: 16.0,
            mean: 0.0,
        },
    );
    spec.t_grid = vec![256];
    spec.eps_grid = vec![0.0, 0.02, 0.04, 0.08, 0.16, 0.32];
    spec.perturbation = Some(PerturbationSpec::constant_bias(0.0, 0));
    spec.tv.method = TvChoice::Oracle;
    let result = run_score_error_scan(&spec)?;
    for p in &result.excess {
        println!("eps {:<5} tv {:.5e}  excess {:.5e}", p.eps, p.tv, p.excess);
    }
    if let Some(fit) = result.fit {
        println!("log-log slope of excess TV: {:.3}", fit.slope);
    }
    Ok(())
}
