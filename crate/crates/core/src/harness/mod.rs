//! Experiment configuration, rate scans, the validation suite and the files
//! each run writes.

mod output;
mod scans;
mod spec;
mod validation;


pub use output::{
    write_components_csv, write_lowdim_outputs, write_rate_outputs, write_results_csv,
    write_score_error_outputs, RESULTS_HEADER,
};
pub use scans::{
    row_seed, run_lowdim_scan, run_rate_scan, run_score_error_scan, DesignFit, ExcessPoint,
    LowdimScanResult, RateScanResult, RowFailure, ScanRow, ScoreErrorScanResult, FIT_MIN_R_SQUARED,
};
pub use spec::{
    ExperimentSpec, ScheduleConstants, TargetFamily, TvChoice, TvConfig, MIN_SAMPLE_TRAJECTORIES,
    SPEC_VERSION,
};
pub use validation::{
    run_validation_suite, run_validation_with, CheckResult, ValidationOptions, ValidationReport,
};

use crate::error::{LabError, Result};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "DDPM_LAB_THREADS";

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None`. Results do not depend on the worker count.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(LabError::Config("workers must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| LabError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
}
