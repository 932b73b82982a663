use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("step index {t} out of range 1..={steps}")]
    StepOutOfRange { t: usize, steps: usize },

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component responsibilities underflowed to zero at step {t}")]
    ResponsibilityUnderflow { t: usize },

    #[error("non-finite state at step {t} (trajectory {trajectory})")]
    NonFinite { t: usize, trajectory: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "grid covers {covered:.6} of the analytic mass; missing mass {missing:.3e} exceeds 1e-4"
    )]
    GridCoverage { covered: f64, missing: f64 },

    #[error("scan produced {0} valid rows; at least 3 are required")]
    TooFewRows(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
