//! Target definition files (TOML or JSON).
//!
//! ```toml
//! kind = "point_masses"
//! [[atoms]]
//! weight = 0.5
//! location = [-1.0]
//! [[atoms]]
//! weight = 0.5
//! location = [1.0]
//! ```
//!
//! Embedded targets nest a base definition and give the `d x k` embedding
//! row by row:
//!
//! ```toml
//! kind = "embedded"
//! embed = [[1.0], [0.0], [0.0]]
//! offset = [0.0, 0.0, 0.0]
//! [base]
//! kind = "point_masses"
//! atoms = [{ weight = 1.0, location = [0.5] }]
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{
    Atom, BaseTarget, EmbeddedTarget, GaussianComponent, GaussianMixtureTarget,
    PointMassMixtureTarget, Target, TargetModel,
};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponentDef {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDef {
    pub weight: f64,
    pub location: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetDef {
    GaussianMixture {
        components: Vec<GaussianComponentDef>,
    },
    PointMasses {
        atoms: Vec<AtomDef>,
    },
    Embedded {
        base: Box<TargetDef>,
        embed: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
}

impl TargetDef {
    /// Parses a definition; `.json` files are read as JSON, everything else
    /// as TOML.
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
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Validates and builds the target.
    pub fn build(&self) -> Result<Target> {
        Ok(match self {
            TargetDef::Embedded {
                base,
                embed,
                offset,
            } => {
                let base = match base.build_base()? {
                    Some(b) => b,
                    None => {
                        return Err(LabError::InvalidTarget(
                            "embedded base cannot itself be embedded".into(),
                        ))
                    }
                };
                let rows = embed.len();
                let cols = embed.first().map_or(0, Vec::len);
                if embed.iter().any(|r| r.len() != cols) {
                    return Err(LabError::InvalidTarget(
                        "embedding rows have unequal lengths".into(),
                    ));
                }
                let matrix = DMatrix::from_fn(rows, cols, |i, j| embed[i][j]);
                let offset = match offset {
                    Some(o) => DVector::from_column_slice(o),
                    None => DVector::zeros(rows),
                };
                EmbeddedTarget::new(base, matrix, offset)?.into()
            }
            other => other.build_base()?.expect("non-embedded kind").into(),
        })
    }

    fn build_base(&self) -> Result<Option<BaseTarget>> {
        Ok(match self {
            TargetDef::GaussianMixture { components } => {
                let comps = components
                    .iter()
                    .map(|c| {
                        let d = c.mean.len();
                        if c.cov.len() != d || c.cov.iter().any(|r| r.len() != d) {
                            return Err(LabError::InvalidTarget(format!(
                                "covariance must be {d} x {d}"
                            )));
                        }
                        Ok(GaussianComponent {
                            weight: c.weight,
                            mean: DVector::from_column_slice(&c.mean),
                            cov: DMatrix::from_fn(d, d, |i, j| c.cov[i][j]),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(BaseTarget::Gaussian(GaussianMixtureTarget::new(comps)?))
            }
            TargetDef::PointMasses { atoms } => {
                let atoms = atoms
                    .iter()
                    .map(|a| Atom {
                        weight: a.weight,
                        location: DVector::from_column_slice(&a.location),
                    })
                    .collect();
                Some(BaseTarget::PointMasses(PointMassMixtureTarget::new(atoms)?))
            }
            TargetDef::Embedded { .. } => None,
        })
    }

    fn from_base(base: &BaseTarget) -> Self {
        match base {
            BaseTarget::Gaussian(g) => TargetDef::GaussianMixture {
                components: g
                    .components()
                    .iter()
                    .map(|c| GaussianComponentDef {
                        weight: c.weight,
                        mean: c.mean.iter().copied().collect(),
                        cov: c
                            .cov
                            .row_iter()
                            .map(|r| r.iter().copied().collect())
                            .collect(),
                    })
                    .collect(),
            },
            BaseTarget::PointMasses(p) => TargetDef::PointMasses {
                atoms: p
                    .atoms()
                    .iter()
                    .map(|a| AtomDef {
                        weight: a.weight,
                        location: a.location.iter().copied().collect(),
                    })
                    .collect(),
            },
        }
    }
}

impl From<&Target> for TargetDef {
    fn from(target: &Target) -> Self {
        match target.model() {
            TargetModel::GaussianMixture(g) => {
                TargetDef::from_base(&BaseTarget::Gaussian(g.clone()))
            }
            TargetModel::PointMasses(p) => {
                TargetDef::from_base(&BaseTarget::PointMasses(p.clone()))
            }
            TargetModel::Embedded(e) => TargetDef::Embedded {
                base: Box::new(TargetDef::from_base(e.base())),
                embed: e
                    .embed()
                    .row_iter()
                    .map(|r| r.iter().copied().collect())
                    .collect(),
                offset: Some(e.offset().iter().copied().collect()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_module_doc_examples() {
        let toml_text = r#"
kind = "point_masses"
[[atoms]]
weight = 0.5
location = [-1.0]
[[atoms]]
weight = 0.5
location = [1.0]
"#;
        let t = TargetDef::from_toml(toml_text).unwrap().build().unwrap();
        assert_eq!(t.kind(), "point_masses");
        assert_eq!(t.dim(), 1);

        let embedded = r#"
kind = "embedded"
embed = [[1.0], [0.0], [0.0]]
offset = [0.0, 0.0, 0.0]
[base]
kind = "point_masses"
atoms = [{ weight = 1.0, location = [0.5] }]
"#;
        let t = TargetDef::from_toml(embedded).unwrap().build().unwrap();
        assert_eq!(t.kind(), "embedded");
        assert_eq!(t.dim(), 3);
    }

    #[test]
    fn json_round_trip_through_target() {
        let json = r#"{"kind":"gaussian_mixture","components":[
            {"weight":0.25,"mean":[0.0,1.0],"cov":[[1.0,0.2],[0.2,0.5]]},
            {"weight":0.75,"mean":[2.0,-1.0],"cov":[[0.3,0.0],[0.0,0.3]]}]}"#;
        let def = TargetDef::from_json(json).unwrap();
        let target = def.build().unwrap();
        assert_eq!(TargetDef::from(&target), def);
        let again = serde_json::to_string(&def).unwrap();
        assert_eq!(TargetDef::from_json(&again).unwrap(), def);
    }

    #[test]
    fn rejects_invalid_definitions() {
        let bad_weights = r#"{"kind":"point_masses","atoms":[{"weight":0.5,"location":[0.0]}]}"#;
        assert!(TargetDef::from_json(bad_weights).unwrap().build().is_err());

        let not_orthonormal = r#"
kind = "embedded"
embed = [[1.0], [1.0]]
[base]
kind = "point_masses"
atoms = [{ weight = 1.0, location = [0.5] }]
"#;
        assert!(TargetDef::from_toml(not_orthonormal)
            .unwrap()
            .build()
            .is_err());

        let nested = r#"
kind = "embedded"
embed = [[1.0], [0.0]]
[base]
kind = "embedded"
embed = [[1.0]]
[base.base]
kind = "point_masses"
atoms = [{ weight = 1.0, location = [0.5] }]
"#;
        assert!(TargetDef::from_toml(nested).unwrap().build().is_err());

        let unknown_kind = r#"{"kind":"cauchy","atoms":[]}"#;
        assert!(TargetDef::from_json(unknown_kind).is_err());

        let singular = r#"{"kind":"gaussian_mixture","components":[{"weight":1.0,"mean":[0.0,0.0],"cov":[[1.0,1.0],[1.0,1.0]]}]}"#;
        assert!(TargetDef::from_json(singular).unwrap().build().is_err());
    }
}
