//! Scenario execution and reporting: `run_scenario` drives the engine and
//! the requested analyses; `emit_report` writes `report.json` (deterministic
//! for a fixed scenario and seed), `trace.csv`, and `spectra.csv`.

use crate::analysis::{
    basin_decomposition, check_idempotent, verify_spectral_mapping, AnalysisError,
};
use crate::engine::{
    iterate_to_fixed_point, EngineError, FixedPointResult, Stage, StageRecord, SPECTRUM_DIM_CAP,
};
use crate::operator::{HermitianOperator, DEFAULT_SYM_TOL};
use crate::scenario::{Analysis, ResolvedScenario, Scenario};
use crate::semigroup::{
    koopman_shift_truncated, semigroup_at, semigroup_limit, yosida_power_limit, KERNEL_TOL,
};
use crate::spectral::{eig_decompose, op_distance, SpectralError, DEFAULT_CLUSTER_TOL};
use crate::transform::PhiError;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

/// Base tolerance for the per-stage spectral-mapping check.
pub const SPECTRAL_MAPPING_BASE_TOL: f64 = 1e-6;
/// Power budget for the yosida analysis.
pub const YOSIDA_N_MAX: usize = 200;
/// Times at which the decay bound is sampled in the semigroup analysis.
pub const DECAY_SAMPLE_TIMES: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Map(#[from] crate::maps::MapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

/// Every tolerance a run actually used, echoed so pass/fail is auditable
/// without rerunning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub epsilon: f64,
    pub sym_tol: f64,
    pub cluster_tol: f64,
    pub fixed_tol: f64,
    pub kernel_tol: f64,
    pub spectral_mapping_base: f64,
    pub idempotence_tol: f64,
    pub escape_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointBlock {
    pub status: String,
    pub stage: Option<Stage>,
    pub stage_display: Option<String>,
    pub final_residual: Option<f64>,
    pub a_infinity_dim: Option<usize>,
    pub a_infinity_spectrum: Option<Vec<f64>>,
    pub failure_reason: Option<String>,
    pub stages_recorded: usize,
    pub omega_limits_taken: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMappingSummary {
    pub stage: String,
    pub applications: usize,
    pub max_deviation: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMappingBlock {
    pub overall_pass: bool,
    pub tolerance_base: f64,
    pub per_stage: Vec<StageMappingSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdempotenceBlock {
    pub is_projection: Option<bool>,
    pub defect: Option<f64>,
    pub tol: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinComponentSummary {
    pub attractor: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinsBlock {
    pub components: Vec<BasinComponentSummary>,
    pub escaped_dim: usize,
    pub source_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub distance: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupLimitBlock {
    pub gap: Option<f64>,
    pub kernel_dim: Option<usize>,
    pub decay_samples: Vec<DecaySample>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YosidaBlock {
    pub t0: f64,
    pub converged_at: Option<usize>,
    pub distance_to_kernel_projection: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoopmanBlock {
    pub blocks: usize,
    pub block_dim: usize,
    pub strictly_lower_block_shift: bool,
    pub nilpotency_defect: f64,
    pub norm_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysesBlock {
    pub spectral_mapping: Option<SpectralMappingBlock>,
    pub idempotence: Option<IdempotenceBlock>,
    pub basins: Option<BasinsBlock>,
    pub semigroup_limit: Option<SemigroupLimitBlock>,
    pub yosida: Option<YosidaBlock>,
    pub koopman: Option<KoopmanBlock>,
}

/// The structured run report. `report.json` is byte-identical across reruns
/// of the same scenario and seed; wall time and the full trace live only on
/// the in-memory value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub seed: u64,
    pub scenario: Scenario,
    pub tolerances: Tolerances,
    pub fixed_point: FixedPointBlock,
    pub analyses: AnalysesBlock,
    #[serde(skip)]
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub trace: Vec<StageRecord>,
}

fn spectrum_if_small(op: &HermitianOperator) -> Result<Option<Vec<f64>>, SpectralError> {
    if op.dim() > SPECTRUM_DIM_CAP {
        return Ok(None);
    }
    Ok(Some(eig_decompose(op, 0.0)?.raw_eigenvalues()))
}

/// Execute a resolved scenario: the fixed-point iteration followed by every
/// requested analysis. Non-stabilization is reported, not raised; only
/// genuine failures (domain violations, I/O) surface as errors.
pub fn run_scenario(rs: &ResolvedScenario) -> Result<RunReport, ReportError> {
    let started = Instant::now();
    let source_decomposition = eig_decompose(&rs.operator, DEFAULT_CLUSTER_TOL)?;

    let (result, trace, fixed_point) =
        match iterate_to_fixed_point(&rs.transform, &rs.operator, &rs.config) {
            Ok(res) => {
                let block = FixedPointBlock {
                    status: "stabilized".to_string(),
                    stage: Some(res.stabilization_stage),
                    stage_display: Some(res.stabilization_stage.to_string()),
                    final_residual: Some(res.final_residual),
                    a_infinity_dim: Some(res.a_infinity.dim()),
                    a_infinity_spectrum: spectrum_if_small(&res.a_infinity)?,
                    failure_reason: None,
                    stages_recorded: res.trace.len(),
                    omega_limits_taken: res
                        .trace
                        .iter()
                        .map(|r| r.stage.omega_limits)
                        .max()
                        .unwrap_or(0),
                };
                let trace = res.trace.clone();
                (Some(res), trace, block)
            }
            Err(EngineError::NotStabilized { reason, trace }) => {
                let block = FixedPointBlock {
                    status: "not_stabilized".to_string(),
                    stage: None,
                    stage_display: None,
                    final_residual: None,
                    a_infinity_dim: None,
                    a_infinity_spectrum: None,
                    failure_reason: Some(reason.to_string()),
                    stages_recorded: trace.len(),
                    omega_limits_taken: trace
                        .iter()
                        .map(|r| r.stage.omega_limits)
                        .max()
                        .unwrap_or(0),
                };
                (None, trace, block)
            }
            Err(EngineError::Phi(e)) => return Err(e.into()),
        };

    let analyses = run_analyses(rs, &source_decomposition, result.as_ref(), &trace)?;

    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: rs.seed,
        scenario: rs.raw.clone(),
        tolerances: Tolerances {
            epsilon: rs.config.epsilon,
            sym_tol: DEFAULT_SYM_TOL,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            fixed_tol: rs.orbit_config.fixed_tol,
            kernel_tol: KERNEL_TOL,
            spectral_mapping_base: SPECTRAL_MAPPING_BASE_TOL,
            idempotence_tol: rs.config.epsilon,
            escape_bound: rs.map.as_ref().map(|m| m.escape_bound()),
        },
        fixed_point,
        analyses,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        trace,
    };
    Ok(report)
}

fn run_analyses(
    rs: &ResolvedScenario,
    source: &crate::spectral::SpectralDecomposition,
    result: Option<&FixedPointResult>,
    trace: &[StageRecord],
) -> Result<AnalysesBlock, ReportError> {
    let mut block = AnalysesBlock {
        spectral_mapping: None,
        idempotence: None,
        basins: None,
        semigroup_limit: None,
        yosida: None,
        koopman: None,
    };

    for analysis in &rs.analyses {
        match analysis {
            Analysis::SpectralMapping => {
                let map = rs
                    .transform
                    .scalar_map()
                    .expect("validated: scalar transform");
                let report = verify_spectral_mapping(trace, map, SPECTRAL_MAPPING_BASE_TOL)?;
                block.spectral_mapping = Some(SpectralMappingBlock {
                    overall_pass: report.overall_pass,
                    tolerance_base: report.tolerance,
                    per_stage: report
                        .per_stage
                        .iter()
                        .map(|s| StageMappingSummary {
                            stage: s.stage.to_string(),
                            applications: s.applications,
                            max_deviation: s.max_deviation,
                            allowed: s.allowed,
                        })
                        .collect(),
                });
            }
            Analysis::Idempotence => {
                block.idempotence = Some(match result {
                    Some(res) => {
                        let (is_projection, defect) =
                            check_idempotent(&res.a_infinity, rs.config.epsilon);
                        IdempotenceBlock {
                            is_projection: Some(is_projection),
                            defect: Some(defect),
                            tol: rs.config.epsilon,
                            note: None,
                        }
                    }
                    None => IdempotenceBlock {
                        is_projection: None,
                        defect: None,
                        tol: rs.config.epsilon,
                        note: Some("skipped: iteration did not stabilize".to_string()),
                    },
                });
            }
            Analysis::Basins => {
                let map = rs
                    .transform
                    .scalar_map()
                    .expect("validated: scalar transform");
                let basins = basin_decomposition(source, map, &rs.orbit_config)?;
                block.basins = Some(BasinsBlock {
                    components: basins
                        .components
                        .iter()
                        .map(|c| BasinComponentSummary {
                            attractor: c.attractor,
                            dim: c.dim(),
                        })
                        .collect(),
                    escaped_dim: basins.escaped_dim,
                    source_dim: basins.source_dim,
                });
            }
            Analysis::SemigroupLimit => {
                block.semigroup_limit = Some(match semigroup_limit(source, KERNEL_TOL) {
                    Ok((projection, gap)) => {
                        let kernel_dim: usize = source
                            .clusters()
                            .iter()
                            .filter(|c| c.value.abs() <= KERNEL_TOL)
                            .map(|c| c.multiplicity())
                            .sum();
                        let mut samples = Vec::new();
                        for &t in &DECAY_SAMPLE_TIMES {
                            if let Ok(tt) = semigroup_at(source, t) {
                                samples.push(DecaySample {
                                    t,
                                    distance: op_distance(&tt, &projection),
                                    bound: (-gap * t).exp(),
                                });
                            }
                        }
                        SemigroupLimitBlock {
                            gap: Some(gap),
                            kernel_dim: Some(kernel_dim),
                            decay_samples: samples,
                            note: None,
                        }
                    }
                    Err(e) => SemigroupLimitBlock {
                        gap: None,
                        kernel_dim: None,
                        decay_samples: Vec::new(),
                        note: Some(e.to_string()),
                    },
                });
            }
            Analysis::Yosida => {
                block.yosida = Some(
                    match yosida_power_limit(source, rs.yosida_t0, YOSIDA_N_MAX, 1e-8) {
                        Ok((limit, converged_at)) => {
                            let kernel = source.spectral_projection(crate::maps::Interval::new(
                                -KERNEL_TOL,
                                KERNEL_TOL,
                            ));
                            YosidaBlock {
                                t0: rs.yosida_t0,
                                converged_at,
                                distance_to_kernel_projection: Some(op_distance(&limit, &kernel)),
                                note: None,
                            }
                        }
                        Err(e) => YosidaBlock {
                            t0: rs.yosida_t0,
                            converged_at: None,
                            distance_to_kernel_projection: None,
                            note: Some(e.to_string()),
                        },
                    },
                );
            }
            Analysis::Koopman => {
                match koopman_shift_truncated(&rs.transform, &rs.operator, rs.koopman_blocks) {
                    Ok(k) => {
                        block.koopman = Some(KoopmanBlock {
                            blocks: k.block_count(),
                            block_dim: k.block_dim(),
                            strictly_lower_block_shift: k.is_strictly_lower_block_shift(),
                            nilpotency_defect: k.nilpotency_defect(),
                            norm_estimate: k.norm_estimate(),
                        });
                    }
                    Err(e) => {
                        // Validation keeps this unreachable for scenario
                        // runs; surface it rather than hide it.
                        return Err(ReportError::Io(std::io::Error::other(e.to_string())));
                    }
                }
            }
        }
    }
    Ok(block)
}

/// Serialize the deterministic part of a report.
pub fn report_json(report: &RunReport) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Parse a `report.json` back. The trace and wall time are not part of the
/// serialized artifact and come back empty.
pub fn parse_report(text: &str) -> Result<RunReport, ReportError> {
    Ok(serde_json::from_str(text)?)
}

/// Write `report.json`, `trace.csv`, and `spectra.csv` into `dir`,
/// returning the paths written.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let json_path = dir.join("report.json");
    std::fs::write(&json_path, report_json(report)?)?;
    written.push(json_path);

    let trace_path = dir.join("trace.csv");
    let mut out = std::fs::File::create(&trace_path)?;
    writeln!(out, "stage,dim,residual,spectrum")?;
    for rec in &report.trace {
        let spectrum = match &rec.spectrum {
            Some(s) => s
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(";"),
            None => "omitted".to_string(),
        };
        writeln!(
            out,
            "{},{},{},{}",
            rec.stage,
            rec.operator.dim(),
            rec.residual,
            spectrum
        )?;
    }
    written.push(trace_path);

    let spectra_path = dir.join("spectra.csv");
    let mut out = std::fs::File::create(&spectra_path)?;
    let width = report
        .trace
        .iter()
        .filter_map(|r| r.spectrum.as_ref().map(|s| s.len()))
        .max()
        .unwrap_or(0);
    let header: Vec<String> = std::iter::once("stage".to_string())
        .chain((0..width).map(|i| format!("lambda_{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let escape_bound = report.tolerances.escape_bound.unwrap_or(f64::INFINITY);
    let mut column_escaped = vec![false; width];
    for rec in &report.trace {
        let mut row = vec![rec.stage.to_string()];
        match &rec.spectrum {
            Some(s) => {
                for (j, escaped) in column_escaped.iter_mut().enumerate() {
                    let cell = match s.get(j) {
                        Some(&v) => {
                            if *escaped || v.abs() > escape_bound || !v.is_finite() {
                                *escaped = true;
                                "escaped".to_string()
                            } else {
                                format!("{v}")
                            }
                        }
                        None => String::new(),
                    };
                    row.push(cell);
                }
            }
            None => {
                for _ in 0..width {
                    row.push("omitted".to_string());
                }
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    written.push(spectra_path);

    Ok(written)
}
