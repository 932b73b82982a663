//! Command-line front end.
//!
//! Exit status: `0` on success, `1` when an experiment or check fails, `2` on
//! usage errors (bad flags, unreadable config files). Flags take precedence
//! over config-file values, which take precedence over built-in defaults. The
//! worker count defaults to `DDPM_LAB_THREADS` when set.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::LabError;
use crate::harness::{
    self, run_lowdim_scan, run_rate_scan, run_score_error_scan, run_validation_suite, with_workers,
    ExperimentSpec,
};
use crate::samplers::{run_reverse, write_sample_dump, DesignTag, DumpFormat, SamplerCoefficients};
use crate::schedule::Schedule;
use crate::scores::ExactProvider;
use crate::targets::{covering_number, intrinsic_dimension_estimate, torus_cloud, TargetDef};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ddpm-lab",
    version,
    about = "Exact-score experiments for DDPM and DDIM samplers"
)]
pub struct Cli {
    /// More output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Suppress the resolved-spec echo.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the validation suite; exit 0 when every check passes.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report as JSON to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// TV against the exact X_1 law for every T in the config's grid.
    RateScan(ScanArgs),
    /// Excess TV as a function of the score-error magnitude at a fixed T.
    ScoreErrorScan(ScanArgs),
    /// Both DDPM coefficient designs on embedded point-mass targets.
    LowdimScan(ScanArgs),
    /// Draw Y_1 with exact scores and write the matrix plus a metadata sidecar.
    Sample(SampleArgs),
    /// Write the variance schedule as CSV.
    ScheduleDump {
        /// Number of steps.
        #[arg(long = "T", value_name = "T")]
        steps: usize,
        #[arg(long, default_value_t = 2.0)]
        c0: f64,
        #[arg(long, default_value_t = 4.0)]
        c1: f64,
        /// Output directory; `schedule.csv` is written inside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Covering numbers and dimension estimate of a flat-torus point cloud.
    Covering {
        /// Torus dimension.
        #[arg(long)]
        k: usize,
        /// Ambient dimension.
        #[arg(long, default_value_t = 16)]
        d: usize,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Covering radii.
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        eps: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Experiment config (TOML, or JSON by extension).
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Trajectories per row.
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Write runtime_s as 0 so reruns produce identical bytes.
    #[arg(long)]
    pub no_runtime: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Target definition (TOML, or JSON by extension).
    pub target: PathBuf,
    #[arg(long = "T", value_name = "T")]
    pub steps: usize,
    #[arg(long, default_value_t = 2.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 4.0)]
    pub c1: f64,
    #[arg(long, default_value = "ddpm_standard")]
    pub design: DesignTag,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "csv")]
    pub format: DumpFormat,
    /// Output file; the sidecar goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn workers(flag: Option<usize>) -> Option<usize> {
    flag.or_else(harness::workers_from_env)
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Validate {
            seed,
            out,
            workers: w,
        } => {
            let report = with_workers(workers(*w), || run_validation_suite(*seed))?;
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status} {} (margin {:.3e}) {}", c.name, c.margin, c.detail);
            }
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                let json = serde_json::to_string_pretty(&report).expect("report serializes");
                fs::write(dir.join("validation.json"), json + "\n")?;
            }
            Ok(if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
        Command::RateScan(args) => {
            let spec = resolve(cli, args)?;
            let result = with_workers(spec.workers, || run_rate_scan(&spec))??;
            harness::write_rate_outputs(&spec, &result, &args.out)?;
            report_rows(cli, &result.rows, &result.failures);
            match &result.fit {
                Some(f) => println!(
                    "slope {:.4}  r2 {:.4}  points {}",
                    f.slope,
                    f.r_squared,
                    f.points.len()
                ),
                None => println!(
                    "no fit: {}",
                    result.fit_error.as_deref().unwrap_or("unknown")
                ),
            }
            Ok(EXIT_OK)
        }
        Command::ScoreErrorScan(args) => {
            let spec = resolve(cli, args)?;
            let result = with_workers(spec.workers, || run_score_error_scan(&spec))??;
            harness::write_score_error_outputs(&spec, &result, &args.out)?;
            for p in &result.excess {
                println!("eps {:<8} tv {:.6e}  excess {:.6e}", p.eps, p.tv, p.excess);
            }
            match &result.fit {
                Some(f) => println!("slope {:.4}  r2 {:.4}", f.slope, f.r_squared),
                None => println!(
                    "no fit: {}",
                    result.fit_error.as_deref().unwrap_or("unknown")
                ),
            }
            Ok(EXIT_OK)
        }
        Command::LowdimScan(args) => {
            let spec = resolve(cli, args)?;
            let result = with_workers(spec.workers, || run_lowdim_scan(&spec))??;
            harness::write_lowdim_outputs(&spec, &result, &args.out)?;
            report_rows(cli, &result.rows, &result.failures);
            for f in &result.fits {
                match &f.fit {
                    Some(fit) => println!(
                        "k {} {:<14} slope {:.4}  r2 {:.4}",
                        f.k, f.design, fit.slope, fit.r_squared
                    ),
                    None => println!(
                        "k {} {:<14} no fit: {}",
                        f.k,
                        f.design,
                        f.fit_error.as_deref().unwrap_or("")
                    ),
                }
            }
            Ok(EXIT_OK)
        }
        Command::Sample(args) => sample(cli, args),
        Command::ScheduleDump { steps, c0, c1, out } => {
            let schedule = Schedule::new(*steps, *c0, *c1)?;
            if !cli.quiet {
                println!("T = {steps}, c0 = {c0}, c1 = {c1}");
            }
            fs::create_dir_all(out)?;
            let path = out.join("schedule.csv");
            let mut buf = Vec::new();
            schedule.write_csv(&mut buf)?;
            fs::write(&path, buf)?;
            for c in schedule.validity_report().failed() {
                println!(
                    "warning: schedule check {} fails (margin {:.3e})",
                    c.name, c.margin
                );
            }
            println!("wrote {}", path.display());
            Ok(EXIT_OK)
        }
        Command::Covering {
            k,
            d,
            n,
            radius,
            seed,
            eps,
        } => {
            if !cli.quiet {
                println!(
                    "k = {k}, d = {d}, n = {n}, radius = {radius}, seed = {seed}, eps = {eps:?}"
                );
            }
            let cloud = torus_cloud(*k, *d, *radius, *n, *seed)?;
            for &e in eps {
                println!("eps {e:<6} N {}", covering_number(&cloud, e)?);
            }
            println!(
                "dimension estimate {:.3}",
                intrinsic_dimension_estimate(&cloud, eps)?
            );
            Ok(EXIT_OK)
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentSpec, Failure> {
    if !path.is_file() {
        return Err(Failure::Usage(format!(
            "config file not found: {}",
            path.display()
        )));
    }
    ExperimentSpec::from_path(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Config merged with flags, echoed unless `--quiet`.
fn resolve(cli: &Cli, args: &ScanArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(n) = args.trajectories {
        spec.trajectories = n;
    }
    if args.no_runtime {
        spec.record_runtime = false;
    }
    spec.workers = args
        .workers
        .or(spec.workers)
        .or_else(harness::workers_from_env);
    if !cli.quiet {
        println!("# resolved spec\n{}", spec.to_toml());
    }
    Ok(spec)
}

fn report_rows(cli: &Cli, rows: &[harness::ScanRow], failures: &[harness::RowFailure]) {
    for r in rows {
        println!(
            "T {:<6} {:<14} tv {:.6e}  stderr {:.2e}  floor {:.2e}",
            r.steps, r.design, r.tv, r.tv_stderr, r.noise_floor
        );
        if cli.verbose > 0 && !r.schedule_failures.is_empty() {
            println!(
                "  schedule checks failing: {}",
                r.schedule_failures.join(", ")
            );
        }
    }
    for f in failures {
        eprintln!("row T = {} ({}) failed: {}", f.steps, f.design, f.error);
    }
}

fn sample(cli: &Cli, args: &SampleArgs) -> Result<i32, Failure> {
    if !args.target.is_file() {
        return Err(Failure::Usage(format!(
            "target file not found: {}",
            args.target.display()
        )));
    }
    let def = TargetDef::from_path(&args.target)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.target.display())))?;
    let target = def.build()?;
    if !cli.quiet {
        println!(
            "T = {}, c0 = {}, c1 = {}, design = {}, n = {}, seed = {}, format = {:?}",
            args.steps, args.c0, args.c1, args.design, args.n, args.seed, args.format
        );
    }
    let schedule = Schedule::new(args.steps, args.c0, args.c1)?;
    let coeffs = SamplerCoefficients::for_design(args.design, &schedule)?;
    let provider = ExactProvider::new(&target, &schedule)?;
    let result = with_workers(workers(args.workers), || {
        run_reverse(&provider, &schedule, &coeffs, args.n, args.seed)
    })??;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let meta = write_sample_dump(&result, &target, &args.out, args.format)?;
    println!("wrote {} and {}", args.out.display(), meta.display());
    Ok(EXIT_OK)
}
