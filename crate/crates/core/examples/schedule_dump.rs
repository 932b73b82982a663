//! Prints the first and last steps of the schedule and its inequality checks.

use ddpm_lab::Schedule;

fn main() -> ddpm_lab::Result<()> {
    let steps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let schedule = Schedule::new(steps, 2.0, 4.0)?;
    println!(
        "{:>5} {:>14} {:>14} {:>14}",
        "t", "beta", "alpha", "alpha_bar"
    );
    for t in [1, 2, 3, steps / 2, steps - 1, steps] {
        println!(
            "{t:>5} {:>14.6e} {:>14.8} {:>14.6e}",
            schedule.beta(t),
            schedule.alpha(t),
            schedule.alpha_bar(t)
        );
    }
    for check in schedule.validity_report().checks {
        let status = if check.passed { "ok  " } else { "FAIL" };
        println!("{status} {:<45} margin {:.3e}", check.name, check.margin);
    }
    Ok(())
}
