//! Scenario files: one experiment per TOML file, validated eagerly so that
//! invalid scenarios never reach the engine.
//!
//! Keys: `operator` (path or inline array-of-arrays), `map`, `transform`
//! (`scalar` | `direct_sum_identity` | `composite:[...]`), `epsilon`,
//! `max_stages`, `max_omega_limits`, `space_budget`, `equivalence_mode`
//! (`strict` | `modulo_trivial`), `analyses`, `escape_bound`, `seed`,
//! `output`, and the analysis parameters `yosida_t0`, `koopman_blocks`.

use crate::analysis::OrbitConfig;
use crate::engine::IterationConfig;
use crate::maps::{MapError, SpectralMap, DEFAULT_ESCAPE_BOUND};
use crate::operator::{HermitianOperator, OperatorError};
use crate::opfile::{parse_operator_file, OpFileError};
use crate::transform::{PhiError, PhiTransform, TransformKind};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_KOOPMAN_BLOCKS: usize = 4;
pub const DEFAULT_YOSIDA_T0: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    OpFile(#[from] OpFileError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error("unknown transform descriptor `{descriptor}`")]
    UnknownTransform { descriptor: String },
    #[error("unknown analysis `{name}` (expected spectral_mapping, idempotence, basins, semigroup_limit, yosida, koopman)")]
    UnknownAnalysis { name: String },
    #[error("analysis `{analysis}` requires a scalar-map transform, but the scenario uses `{transform}`")]
    AnalysisNeedsScalarTransform { analysis: String, transform: String },
    #[error("scenario key `map` is required by transform `{needed_by}`")]
    MissingMap { needed_by: String },
    #[error("invalid scenario: {msg}")]
    Invalid { msg: String },
}

/// Operator source: a path to an operator text file, or the matrix inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSource {
    Path(String),
    Inline(Vec<Vec<f64>>),
}

/// Raw scenario as read from disk; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub operator: OperatorSource,
    #[serde(default)]
    pub map: Option<String>,
    #[serde(default)]
    pub transform: Option<String>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub max_stages: Option<usize>,
    #[serde(default)]
    pub max_omega_limits: Option<usize>,
    #[serde(default)]
    pub space_budget: Option<usize>,
    #[serde(default)]
    pub equivalence_mode: Option<String>,
    #[serde(default)]
    pub analyses: Option<Vec<String>>,
    #[serde(default)]
    pub escape_bound: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub yosida_t0: Option<f64>,
    #[serde(default)]
    pub koopman_blocks: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    SpectralMapping,
    Idempotence,
    Basins,
    SemigroupLimit,
    Yosida,
    Koopman,
}

impl Analysis {
    pub fn parse(name: &str) -> Result<Self, ScenarioError> {
        match name {
            "spectral_mapping" => Ok(Analysis::SpectralMapping),
            "idempotence" => Ok(Analysis::Idempotence),
            "basins" => Ok(Analysis::Basins),
            "semigroup_limit" => Ok(Analysis::SemigroupLimit),
            "yosida" => Ok(Analysis::Yosida),
            "koopman" => Ok(Analysis::Koopman),
            other => Err(ScenarioError::UnknownAnalysis {
                name: other.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Analysis::SpectralMapping => "spectral_mapping",
            Analysis::Idempotence => "idempotence",
            Analysis::Basins => "basins",
            Analysis::SemigroupLimit => "semigroup_limit",
            Analysis::Yosida => "yosida",
            Analysis::Koopman => "koopman",
        }
    }

    /// Analyses that read the scalar map off the transform.
    pub fn needs_scalar_transform(&self) -> bool {
        matches!(
            self,
            Analysis::SpectralMapping | Analysis::Basins | Analysis::Koopman
        )
    }
}

/// A validated scenario with everything constructed: the operator, the
/// transform, the iteration config, and the analysis plan.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub raw: Scenario,
    pub operator: HermitianOperator,
    pub map: Option<SpectralMap>,
    pub transform: PhiTransform,
    pub config: IterationConfig,
    pub orbit_config: OrbitConfig,
    pub analyses: Vec<Analysis>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub yosida_t0: f64,
    pub koopman_blocks: usize,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    /// Load and validate a scenario file; relative operator paths resolve
    /// against the scenario's directory.
    pub fn load(path: &Path) -> Result<ResolvedScenario, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        let raw = Scenario::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        raw.resolve(base)
    }

    pub fn resolve(self, base_dir: &Path) -> Result<ResolvedScenario, ScenarioError> {
        let operator = match &self.operator {
            OperatorSource::Path(p) => {
                let path = base_dir.join(p);
                parse_operator_file(&path)?
            }
            OperatorSource::Inline(rows) => HermitianOperator::from_rows(rows)?,
        };

        let escape_bound = self.escape_bound.unwrap_or(DEFAULT_ESCAPE_BOUND);
        if escape_bound <= 0.0 {
            return Err(ScenarioError::Invalid {
                msg: format!("escape_bound must be positive, got {escape_bound}"),
            });
        }
        let map = match &self.map {
            Some(desc) => Some(SpectralMap::parse(desc)?.with_escape_bound(escape_bound)),
            None => None,
        };

        let transform_desc = self.transform.as_deref().unwrap_or("scalar");
        let transform = build_transform(transform_desc, map.as_ref())?;

        let mut config = IterationConfig::default();
        if let Some(eps) = self.epsilon {
            if eps.is_nan() || eps <= 0.0 {
                return Err(ScenarioError::Invalid {
                    msg: format!("epsilon must be positive, got {eps}"),
                });
            }
            config.epsilon = eps;
        }
        if let Some(n) = self.max_stages {
            if n == 0 {
                return Err(ScenarioError::Invalid {
                    msg: "max_stages must be at least 1".to_string(),
                });
            }
            config.max_stages = n;
        }
        if let Some(k) = self.max_omega_limits {
            config.max_omega_limits = k;
        }
        if let Some(b) = self.space_budget {
            if b < operator.dim() {
                return Err(ScenarioError::Invalid {
                    msg: format!(
                        "space_budget {b} is below the operator dimension {}",
                        operator.dim()
                    ),
                });
            }
            config.space_budget = b;
        }
        if let Some(mode) = &self.equivalence_mode {
            config.mode = mode.parse().map_err(|msg| ScenarioError::Invalid { msg })?;
        }

        let mut analyses = Vec::new();
        for name in self.analyses.clone().unwrap_or_default() {
            let analysis = Analysis::parse(&name)?;
            if analysis.needs_scalar_transform()
                && !matches!(transform.kind(), TransformKind::ScalarMap(_))
            {
                return Err(ScenarioError::AnalysisNeedsScalarTransform {
                    analysis: analysis.name().to_string(),
                    transform: transform.label().to_string(),
                });
            }
            if !analyses.contains(&analysis) {
                analyses.push(analysis);
            }
        }

        // Default t0 for the yosida analysis: the explicit key, else the
        // scenario map when it is itself a yosida map.
        let yosida_t0 = match self.yosida_t0 {
            Some(t0) => t0,
            None => self
                .map
                .as_deref()
                .and_then(|m| m.strip_prefix("yosida:"))
                .and_then(|t| t.trim().parse().ok())
                .unwrap_or(DEFAULT_YOSIDA_T0),
        };
        if yosida_t0.is_nan() || yosida_t0 <= 0.0 {
            return Err(ScenarioError::Invalid {
                msg: format!("yosida_t0 must be positive, got {yosida_t0}"),
            });
        }
        let koopman_blocks = self.koopman_blocks.unwrap_or(DEFAULT_KOOPMAN_BLOCKS);
        if koopman_blocks < 2 {
            return Err(ScenarioError::Invalid {
                msg: format!("koopman_blocks must be at least 2, got {koopman_blocks}"),
            });
        }

        let seed = self.seed.unwrap_or(0);
        let output = self.output.as_ref().map(|o| base_dir.join(o));

        Ok(ResolvedScenario {
            raw: self,
            operator,
            map,
            transform,
            config,
            orbit_config: OrbitConfig::default(),
            analyses,
            seed,
            output,
            yosida_t0,
            koopman_blocks,
        })
    }
}

fn build_transform(
    descriptor: &str,
    map: Option<&SpectralMap>,
) -> Result<PhiTransform, ScenarioError> {
    let scalar_part = |needed_by: &str| -> Result<PhiTransform, ScenarioError> {
        let map = map.ok_or_else(|| ScenarioError::MissingMap {
            needed_by: needed_by.to_string(),
        })?;
        Ok(PhiTransform::scalar(map.clone())?)
    };
    match descriptor.trim() {
        "scalar" => scalar_part("scalar"),
        "direct_sum_identity" => Ok(PhiTransform::direct_sum_identity()),
        other => {
            let inner = other
                .strip_prefix("composite:[")
                .and_then(|rest| rest.strip_suffix(']'))
                .ok_or_else(|| ScenarioError::UnknownTransform {
                    descriptor: other.to_string(),
                })?;
            let mut parts = Vec::new();
            for piece in inner.split(',') {
                match piece.trim() {
                    "scalar" => parts.push(scalar_part("composite")?),
                    "direct_sum_identity" => parts.push(PhiTransform::direct_sum_identity()),
                    bad => {
                        return Err(ScenarioError::UnknownTransform {
                            descriptor: bad.to_string(),
                        })
                    }
                }
            }
            Ok(PhiTransform::composite(parts)?)
        }
    }
}
