//! Exact TV after sampling N(0, 2) with three reverse-process designs.

use ddpm_lab::metrics::tv_gaussians_1d;
use ddpm_lab::samplers::{DesignTag, GaussianOracle, SamplerCoefficients};
use ddpm_lab::Schedule;

fn main() -> ddpm_lab::Result<()> {
    let oracle = GaussianOracle::centered(2.0);
    println!(
        "{:>5} {:>14} {:>14} {:>14}",
        "T", "ddpm_standard", "ddpm_lowdim", "ddim"
    );
    for steps in [16, 64, 256, 1024] {
        let schedule = Schedule::new(steps, 2.0, 4.0)?;
        let (mx, vx) = oracle.forward(&schedule, 1);
        let mut row = format!("{steps:>5}");
        for design in [
            DesignTag::DdpmStandard,
            DesignTag::DdpmLowdim,
            DesignTag::Ddim,
        ] {
            let coeffs = SamplerCoefficients::for_design(design, &schedule)?;
            let (my, vy) = oracle.run(&schedule, &coeffs)?;
            row += &format!(" {:>14.4e}", tv_gaussians_1d(mx, vx, my, vy)?);
        }
        println!("{row}");
    }
    Ok(())
}
