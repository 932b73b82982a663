//! Covering-number dimension estimates of flat tori embedded in R^16.

use ddpm_lab::targets::{covering_number, intrinsic_dimension_estimate, torus_cloud};

fn main() -> ddpm_lab::Result<()> {
    let radii = [0.4, 0.2, 0.1, 0.05];
    for k in 1..=3 {
        let cloud = torus_cloud(k, 16, 0.25, 10_000, k as u64)?;
        let counts: Vec<usize> = radii
            .iter()
            .map(|&e| covering_number(&cloud, e))
            .collect::<Result<_, _>>()?;
        let estimate = intrinsic_dimension_estimate(&cloud, &radii)?;
        println!("k {k}  N(eps) {counts:?}  estimate {estimate:.2}");
    }
    Ok(())
}
