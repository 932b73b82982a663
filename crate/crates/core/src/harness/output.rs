use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::json;

use super::scans::{LowdimScanResult, RateScanResult, ScanRow, ScoreErrorScanResult};
use super::spec::ExperimentSpec;
use crate::error::Result;

pub const RESULTS_HEADER: &str =
    "experiment_id,T,d,k,design,eps_score,tv,tv_stderr,noise_floor,seed,runtime_s";

/// Writes rows in the fixed `results.csv` layout.
pub fn write_results_csv<W: Write>(
    experiment_id: &str,
    rows: &[ScanRow],
    mut out: W,
) -> Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            experiment_id,
            r.steps,
            r.d,
            r.k,
            r.design,
            r.eps_score,
            r.tv,
            r.tv_stderr,
            r.noise_floor,
            r.seed,
            r.runtime_s
        )?;
    }
    Ok(())
}

/// Per-component TV of a low-dimensional scan.
pub fn write_components_csv<W: Write>(rows: &[ScanRow], mut out: W) -> Result<()> {
    writeln!(out, "T,k,design,tv_projected,tv_normal,tv_combined")?;
    for r in rows {
        let show = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.steps,
            r.k,
            r.design,
            show(r.tv_projected),
            show(r.tv_normal),
            r.tv
        )?;
    }
    Ok(())
}

fn write_common(
    spec: &ExperimentSpec,
    rows: &[ScanRow],
    fit: serde_json::Value,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    write_results_csv(&spec.experiment_id, rows, &mut csv)?;
    fs::write(dir.join("results.csv"), csv)?;
    fs::write(dir.join("fit.json"), pretty(&fit))?;
    let meta = json!({
        "experiment_id": spec.experiment_id,
        "spec_hash": spec.content_hash(),
        "crate_version": env!("CARGO_PKG_VERSION"),
        "spec": spec,
    });
    fs::write(dir.join("meta.json"), pretty(&meta))?;
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// `results.csv`, `fit.json` and `meta.json` for a rate scan.
pub fn write_rate_outputs(
    spec: &ExperimentSpec,
    result: &RateScanResult,
    dir: &Path,
) -> Result<()> {
    let fit = json!({
        "fit": result.fit,
        "fit_error": result.fit_error,
        "failures": result.failures,
        "schedule_failures": result
            .rows
            .iter()
            .filter(|r| !r.schedule_failures.is_empty())
            .map(|r| json!({"T": r.steps, "checks": r.schedule_failures}))
            .collect::<Vec<_>>(),
    });
    write_common(spec, &result.rows, fit, dir)
}

pub fn write_score_error_outputs(
    spec: &ExperimentSpec,
    result: &ScoreErrorScanResult,
    dir: &Path,
) -> Result<()> {
    let fit = json!({
        "fit": result.fit,
        "fit_error": result.fit_error,
        "excess": result.excess,
        "failures": result.failures,
    });
    write_common(spec, &result.rows, fit, dir)
}

/// Adds `components.csv` to the common outputs.
pub fn write_lowdim_outputs(
    spec: &ExperimentSpec,
    result: &LowdimScanResult,
    dir: &Path,
) -> Result<()> {
    let fit = json!({
        "fits": result.fits,
        "support_dimension": result.support_dimension,
        "failures": result.failures,
    });
    write_common(spec, &result.rows, fit, dir)?;
    let mut csv = Vec::new();
    write_components_csv(&result.rows, &mut csv)?;
    fs::write(dir.join("components.csv"), csv)?;
    Ok(())
}
