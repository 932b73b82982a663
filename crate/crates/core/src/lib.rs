//! Exact-score experiments for DDPM-type samplers: variance schedules,
//! Gaussian and point-mass mixture targets with closed-form scores, reverse
//! samplers, distance metrics and reproducible rate scans.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod samplers;
pub mod samples;
pub mod schedule;
pub mod scores;
pub mod targets;

pub use error::{LabError, Result};
pub use samples::SampleMatrix;
pub use schedule::Schedule;
pub use targets::Target;
