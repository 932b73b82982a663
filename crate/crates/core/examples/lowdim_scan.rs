//! Four atoms on a plane inside R^16: the standard and low-dimensional DDPM
//! coefficient designs compared by exact-factor partition TV.
//!
//! cargo run --release --example lowdim_scan -- 20000

use ddpm_lab::harness::{run_lowdim_scan, ExperimentSpec, TargetFamily};
use ddpm_lab::samplers::DesignTag;
use ddpm_lab::targets::AtomDef;

fn main() -> ddpm_lab::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    let atoms = [
        (0.7, [0.0, 0.0]),
        (0.1, [1.0, 0.2]),
        (0.1, [0.3, 1.1]),
        (0.1, [-0.8, 0.6]),
    ]
    .into_iter()
    .map(|(weight, loc)| AtomDef {
        weight,
        location: loc.to_vec(),
    })
    .collect();
    let mut spec = ExperimentSpec::new(
        "lowdim-example",
        TargetFamily::EmbeddedAtoms {
            atoms,
            embed_seed: 5,
        },
    );
    spec.t_grid = vec![32, 64, 128, 256, 512];
    spec.ambient_dim = Some(16);
    spec.trajectories = n;
    let result = run_lowdim_scan(&spec)?;
    println!("{:>5} {:>14} {:>14}", "T", "standard", "lowdim");
    for &t in &spec.t_grid {
        let tv = |d| result.row(2, d, t).map(|r| r.tv).unwrap_or(f64::NAN);
        println!(
            "{t:>5} {:>14.4e} {:>14.4e}",
            tv(DesignTag::DdpmStandard),
            tv(DesignTag::DdpmLowdim)
        );
    }
    for f in &result.fits {
        if let Some(fit) = &f.fit {
            println!("{:<14} slope {:.3}", f.design, fit.slope);
        }
    }
    Ok(())
}
