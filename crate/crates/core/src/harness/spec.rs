use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::rng::{self, Domain};
use crate::samplers::DesignTag;
use crate::scores::PerturbationSpec;
use crate::targets::{
    Atom, AtomDef, BaseTarget, EmbeddedTarget, GaussianMixtureTarget, PointMassMixtureTarget,
    Target, TargetDef,
};

pub const SPEC_VERSION: u32 = 1;
/// Minimum trajectory count for sample-based TV.
pub const MIN_SAMPLE_TRAJECTORIES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConstants {
    pub c0: f64,
    pub c1: f64,
}

impl Default for ScheduleConstants {
    fn default() -> Self {
        Self { c0: 2.0, c1: 4.0 }
    }
}

/// Data distribution, possibly parameterized by the intrinsic dimension `k`
/// and ambient dimension of a low-dimensional scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetFamily {
    /// `N(mean, variance)` independently in each of `dim` coordinates.
    Gaussian {
        dim: usize,
        variance: f64,
        #[serde(default)]
        mean: f64,
    },
    /// A fully specified target.
    Definition { definition: TargetDef },
    /// Fixed atoms in `R^k`, randomly embedded into the ambient dimension.
    EmbeddedAtoms {
        atoms: Vec<AtomDef>,
        #[serde(default)]
        embed_seed: u64,
    },
    /// `count` atoms drawn from `N(0, spread^2 I_k)` with weights proportional
    /// to `1, 1/2, ..., 1/count`, randomly embedded into the ambient dimension.
    RandomAtoms {
        count: usize,
        spread: f64,
        #[serde(default)]
        atom_seed: u64,
        #[serde(default)]
        embed_seed: u64,
    },
}

impl TargetFamily {
    /// Dimension of the Gaussian product family when the closed-form oracle
    /// applies: `(dim, variance, mean)`.
    pub fn gaussian_params(&self) -> Option<(usize, f64, f64)> {
        match *self {
            TargetFamily::Gaussian {
                dim,
                variance,
                mean,
            } => Some((dim, variance, mean)),
            _ => None,
        }
    }

    /// Intrinsic dimension implied by the family itself, if any.
    pub fn native_k(&self) -> Option<usize> {
        match self {
            TargetFamily::EmbeddedAtoms { atoms, .. } => atoms.first().map(|a| a.location.len()),
            _ => None,
        }
    }

    /// Builds the target. `k` selects the base dimension of generated
    /// families; `ambient` embeds atom families when it exceeds `k`.
    pub fn build(&self, k: Option<usize>, ambient: Option<usize>) -> Result<Target> {
        match self {
            TargetFamily::Gaussian {
                dim,
                variance,
                mean,
            } => {
                if !(*variance > 0.0) {
                    return Err(LabError::Config(format!(
                        "variance must be positive, got {variance}"
                    )));
                }
                let mut g = GaussianMixtureTarget::isotropic(*dim, *variance)?;
                if *mean != 0.0 {
                    let mut comps = g.components().to_vec();
                    comps[0].mean = DVector::from_element(*dim, *mean);
                    g = GaussianMixtureTarget::new(comps)?;
                }
                Ok(g.into())
            }
            TargetFamily::Definition { definition } => definition.build(),
            TargetFamily::EmbeddedAtoms { atoms, embed_seed } => {
                let native = self.native_k().unwrap_or(0);
                if let Some(k) = k {
                    if k != native {
                        return Err(LabError::Config(format!(
                            "atoms live in dimension {native} but k = {k} was requested"
                        )));
                    }
                }
                let base = PointMassMixtureTarget::new(
                    atoms
                        .iter()
                        .map(|a| Atom {
                            weight: a.weight,
                            location: DVector::from_column_slice(&a.location),
                        })
                        .collect(),
                )?;
                embed(BaseTarget::PointMasses(base), ambient, *embed_seed)
            }
            TargetFamily::RandomAtoms {
                count,
                spread,
                atom_seed,
                embed_seed,
            } => {
                let k = k.ok_or_else(|| {
                    LabError::Config("random_atoms needs an intrinsic dimension k".into())
                })?;
                if *count == 0 || k == 0 || !(*spread > 0.0) {
                    return Err(LabError::Config(
                        "random_atoms needs count, k and spread positive".into(),
                    ));
                }
                let mut r = rng::stream(*atom_seed, Domain::Cloud, k as u64);
                let norm: f64 = (1..=*count).map(|i| 1.0 / i as f64).sum();
                let mut atoms = Vec::with_capacity(*count);
                for i in 0..*count {
                    let mut loc = vec![0.0; k];
                    rng::fill_normal(&mut r, &mut loc);
                    atoms.push(Atom {
                        weight: 1.0 / ((i + 1) as f64 * norm),
                        location: DVector::from_vec(loc) * *spread,
                    });
                }
                // exact unit sum
                let rest: f64 = atoms[1..].iter().map(|a| a.weight).sum();
                atoms[0].weight = 1.0 - rest;
                let base = PointMassMixtureTarget::new(atoms)?;
                embed(BaseTarget::PointMasses(base), ambient, *embed_seed)
            }
        }
    }
}

fn embed(base: BaseTarget, ambient: Option<usize>, seed: u64) -> Result<Target> {
    match ambient {
        Some(d) if d > base.dim() => {
            Ok(EmbeddedTarget::with_random_embedding(base, d, seed)?.into())
        }
        Some(d) if d < base.dim() => Err(LabError::Config(format!(
            "ambient dimension {d} is below the intrinsic dimension {}",
            base.dim()
        ))),
        _ => Ok(base.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TvChoice {
    /// Oracle for Gaussian families, atom partition for atomic targets,
    /// otherwise a grid.
    #[default]
    Auto,
    Oracle,
    Grid,
    Partition,
    Sliced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvConfig {
    #[serde(default)]
    pub method: TvChoice,
    /// Grid bin width; derived from the analytic spread when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
    /// Number of random directions for the sliced diagnostic.
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Radius of the atom cells, in forward-noise standard deviations.
    #[serde(default = "default_cell_radius")]
    pub cell_radius: f64,
}

impl Default for TvConfig {
    fn default() -> Self {
        Self {
            method: TvChoice::Auto,
            bin_width: None,
            directions: default_directions(),
            cell_radius: default_cell_radius(),
        }
    }
}

fn default_directions() -> usize {
    32
}

fn default_cell_radius() -> f64 {
    6.0
}

fn default_id() -> String {
    "experiment".into()
}

fn default_trajectories() -> usize {
    100_000
}

fn default_eps_draws() -> usize {
    1_000
}

fn default_true() -> bool {
    true
}

fn default_design() -> DesignTag {
    DesignTag::DdpmStandard
}

/// One experiment, read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub spec_version: u32,
    #[serde(default = "default_id")]
    pub experiment_id: String,
    pub target: TargetFamily,
    #[serde(default)]
    pub schedule: ScheduleConstants,
    #[serde(default, rename = "T_grid", alias = "t_grid")]
    pub t_grid: Vec<usize>,
    #[serde(default = "default_design")]
    pub design: DesignTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub tv: TvConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Score-error magnitudes for score-error scans; must contain 0.
    #[serde(default)]
    pub eps_grid: Vec<f64>,
    /// Intrinsic dimensions for low-dimensional scans.
    #[serde(default)]
    pub k_grid: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dim: Option<usize>,
    /// Forward draws per step when estimating the score error.
    #[serde(default = "default_eps_draws")]
    pub eps_draws: usize,
    /// When false, `runtime_s` is written as 0 so outputs are byte-stable.
    #[serde(default = "default_true")]
    pub record_runtime: bool,
}

impl ExperimentSpec {
    /// A spec with every optional field at its default.
    pub fn new(experiment_id: &str, target: TargetFamily) -> Self {
        Self {
            spec_version: SPEC_VERSION,
            experiment_id: experiment_id.into(),
            target,
            schedule: ScheduleConstants::default(),
            t_grid: Vec::new(),
            design: default_design(),
            perturbation: None,
            trajectories: default_trajectories(),
            tv: TvConfig::default(),
            seed: 0,
            workers: None,
            eps_grid: Vec::new(),
            k_grid: Vec::new(),
            ambient_dim: None,
            eps_draws: default_eps_draws(),
            record_runtime: true,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        spec.check_version()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        spec.check_version()?;
        Ok(spec)
    }

    fn check_version(&self) -> Result<()> {
        if self.spec_version != SPEC_VERSION {
            return Err(LabError::Config(format!(
                "unsupported spec_version {} (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(
            serde_json::to_vec(self).expect("spec serializes"),
        ))
    }

    pub(crate) fn check_t_grid(&self, min_len: usize) -> Result<()> {
        if self.t_grid.len() < min_len {
            return Err(LabError::Config(format!(
                "T grid needs at least {min_len} values, got {}",
                self.t_grid.len()
            )));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Config(
                "T grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_trajectories(&self) -> Result<()> {
        if self.trajectories < MIN_SAMPLE_TRAJECTORIES {
            return Err(LabError::Config(format!(
                "sample-based TV needs at least {MIN_SAMPLE_TRAJECTORIES} trajectories, got {}",
                self.trajectories
            )));
        }
        Ok(())
    }
}
