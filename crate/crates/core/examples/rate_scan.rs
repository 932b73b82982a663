//! TV-versus-T scan on a 1-d Gaussian, once through the closed-form oracle and
//! once through sampled trajectories with a histogram estimate.

use ddpm_lab::harness::{run_rate_scan, ExperimentSpec, TargetFamily, TvChoice};

fn main() -> ddpm_lab::Result<()> {
    let family = TargetFamily::Gaussian {
        dim: 1,
        variance: 2.0,
        mean: 0.0,
    };
    let mut spec = ExperimentSpec::new("rate-example", family.clone());
    spec.t_grid = vec![16, 32, 64, 128, 256];
    spec.tv.method = TvChoice::Oracle;
    let oracle = run_rate_scan(&spec)?;

    let definition = family.build(None, None)?;
    let mut sampled = ExperimentSpec::new(
        "rate-example-grid",
        TargetFamily::Definition {
            definition: (&definition).into(),
        },
    );
    sampled.t_grid = spec.t_grid.clone();
    sampled.trajectories = 20_000;
    sampled.tv.method = TvChoice::Grid;
    let grid = run_rate_scan(&sampled)?;

    println!("{:>5} {:>12} {:>12} {:>12}", "T", "exact", "grid", "floor");
    for (a, b) in oracle.rows.iter().zip(&grid.rows) {
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>12.4e}",
            a.steps, a.tv, b.tv, b.noise_floor
        );
    }
    if let (Some(a), Some(b)) = (&oracle.fit, &grid.fit) {
        println!("slope exact {:.3}, grid {:.3}", a.slope, b.slope);
    }
    Ok(())
}
