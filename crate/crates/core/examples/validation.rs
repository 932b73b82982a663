//! Runs the full validation suite and prints one line per check.
//!
//! cargo run --example validation -- 7

use ddpm_lab::harness::run_validation_suite;

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let start = std::time::Instant::now();
    let report = run_validation_suite(seed);
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} {:<32} margin {:>11.3e}  {}",
            c.name, c.margin, c.detail
        );
    }
    println!(
        "{} of {} checks passed in {:.1} s",
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len(),
        start.elapsed().as_secs_f64()
    );
    if !report.all_passed() {
        std::process::exit(1);
    }
}
