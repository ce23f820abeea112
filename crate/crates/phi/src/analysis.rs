//! Verification suites over iteration traces and fixed points: per-stage
//! spectral mapping against scalar arithmetic, idempotence defects, basin
//! decomposition of the source space by spectral fate, and unitary
//! equivalence of symmetric operators.

use crate::engine::{Stage, StageRecord};
use crate::maps::{scalar_limit, MapError, OrbitKind, SpectralMap};
use crate::mat::Mat;
use crate::operator::HermitianOperator;
use crate::spectral::{eig_decompose, sym_spectral_norm, SpectralDecomposition, SpectralError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("stage {stage} has dimension {dim}, expected {expected} (dimension-changing traces are not comparable)")]
    ShapeMismatch {
        stage: Stage,
        dim: usize,
        expected: usize,
    },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Per-stage comparison of the observed spectrum against the scalar
/// prediction fⁿ(σ(A₀)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMapping {
    pub stage: Stage,
    /// Number of map applications accumulated at this stage.
    pub applications: usize,
    pub predicted: Vec<f64>,
    pub observed: Vec<f64>,
    pub max_deviation: f64,
    /// Allowed deviation at this stage (the base tolerance scaled by the
    /// application count).
    pub allowed: f64,
}

/// Spectral-mapping verification over a whole trace. The per-stage
/// tolerance grows linearly with the number of applications, since the
/// scalar and matrix computation paths drift apart as the iteration runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMappingReport {
    pub per_stage: Vec<StageMapping>,
    pub overall_pass: bool,
    /// Base tolerance; stage n is allowed `tolerance · n`.
    pub tolerance: f64,
}

/// Compare each stage's observed eigenvalue multiset against the scalar
/// iteration of `f` on σ(A₀). Rejects dimension-changing traces.
pub fn verify_spectral_mapping(
    trace: &[StageRecord],
    f: &SpectralMap,
    tol: f64,
) -> Result<SpectralMappingReport, AnalysisError> {
    assert!(!trace.is_empty(), "empty trace");
    let dim = trace[0].operator.dim();
    for rec in trace {
        if rec.operator.dim() != dim {
            return Err(AnalysisError::ShapeMismatch {
                stage: rec.stage,
                dim: rec.operator.dim(),
                expected: dim,
            });
        }
    }

    let observed_spectrum = |rec: &StageRecord| -> Result<Vec<f64>, AnalysisError> {
        match &rec.spectrum {
            Some(s) => Ok(s.clone()),
            None => Ok(eig_decompose(&rec.operator, 0.0)?.raw_eigenvalues()),
        }
    };

    let initial = observed_spectrum(&trace[0])?;
    let mut predicted = initial.clone();
    let mut applications = 0usize;
    let mut per_stage = Vec::with_capacity(trace.len());
    let mut overall_pass = true;

    for (idx, rec) in trace.iter().enumerate() {
        if idx > 0 && !rec.stage.is_omega_limit() {
            applications += 1;
            for value in predicted.iter_mut() {
                if !f.domain().contains(*value) {
                    return Err(AnalysisError::Map(MapError::LeftDomain {
                        value: *value,
                        at_step: applications,
                    }));
                }
                *value = f.eval(*value);
            }
        }
        let observed = observed_spectrum(rec)?;
        let mut predicted_sorted = predicted.clone();
        predicted_sorted.sort_by(f64::total_cmp);
        let max_deviation = predicted_sorted
            .iter()
            .zip(observed.iter())
            .map(|(p, o)| (p - o).abs())
            .fold(0.0_f64, f64::max);
        let allowed = tol * applications as f64;
        if max_deviation > allowed {
            overall_pass = false;
        }
        per_stage.push(StageMapping {
            stage: rec.stage,
            applications,
            predicted: predicted_sorted,
            observed,
            max_deviation,
            allowed,
        });
    }

    Ok(SpectralMappingReport {
        per_stage,
        overall_pass,
        tolerance: tol,
    })
}

/// Projection defect `‖A² − A‖` in the spectral norm; `is_projection`
/// iff the defect is within `tol`.
pub fn check_idempotent(a: &HermitianOperator, tol: f64) -> (bool, f64) {
    let sq = a.mat().matmul(a.mat());
    let defect = sym_spectral_norm(&sq.sub(a.mat()));
    (defect <= tol, defect)
}

/// Configuration for the orbit runs behind a basin decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub fixed_tol: f64,
    pub max_iter: usize,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            fixed_tol: crate::maps::DEFAULT_FIXED_TOL,
            max_iter: 10_000,
        }
    }
}

/// One attractor with an orthonormal basis of its basin inside the source
/// space.
#[derive(Debug, Clone)]
pub struct BasinComponent {
    pub attractor: f64,
    pub basis: Vec<Vec<f64>>,
}

impl BasinComponent {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection onto the component subspace.
    pub fn projection(&self, source_dim: usize) -> Mat {
        let mut p = Mat::zeros(source_dim, source_dim);
        for v in &self.basis {
            for i in 0..source_dim {
                for j in i..source_dim {
                    let c = v[i] * v[j];
                    p.set(i, j, p.get(i, j) + c);
                    p.set(j, i, p.get(i, j));
                }
            }
        }
        p
    }
}

/// Orthogonal split of the source space by spectral fate: one component
/// per attractor reached, with escaped / cycling / undecided spectral
/// weight accumulated in `escaped_dim`.
#[derive(Debug, Clone)]
pub struct BasinDecomposition {
    pub components: Vec<BasinComponent>,
    pub escaped_dim: usize,
    pub source_dim: usize,
}

impl BasinDecomposition {
    /// `Σ_j ξ_j P_j` over the components.
    pub fn reconstruction(&self) -> HermitianOperator {
        let mut m = Mat::zeros(self.source_dim, self.source_dim);
        for c in &self.components {
            m.axpy(c.attractor, &c.projection(self.source_dim));
        }
        HermitianOperator::from_symmetric_mat(m, crate::operator::DEFAULT_SYM_TOL)
    }

    pub fn component_dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.dim()).collect()
    }
}

/// Run the scalar orbit of every eigenvalue cluster and group the cluster
/// eigenspaces by the attractor reached.
pub fn basin_decomposition(
    d: &SpectralDecomposition,
    f: &SpectralMap,
    cfg: &OrbitConfig,
) -> Result<BasinDecomposition, MapError> {
    struct Accum {
        mus: Vec<f64>,
        basis: Vec<Vec<f64>>,
    }
    let mut groups: Vec<Accum> = Vec::new();
    let mut escaped_dim = 0usize;

    for cluster in d.clusters() {
        let outcome = scalar_limit(f, cluster.value, cfg.fixed_tol, cfg.max_iter)?;
        match outcome.kind {
            OrbitKind::Converged(mu) => {
                let slot = groups.iter_mut().find(|g| {
                    let center = g.mus.iter().sum::<f64>() / g.mus.len() as f64;
                    (center - mu).abs() <= cfg.fixed_tol
                });
                match slot {
                    Some(g) => {
                        g.mus.push(mu);
                        g.basis.extend(cluster.basis.iter().cloned());
                    }
                    None => groups.push(Accum {
                        mus: vec![mu],
                        basis: cluster.basis.clone(),
                    }),
                }
            }
            OrbitKind::Escaped { .. } | OrbitKind::Cycling { .. } | OrbitKind::Undecided => {
                escaped_dim += cluster.multiplicity();
            }
        }
    }

    let mut components: Vec<BasinComponent> = groups
        .into_iter()
        .map(|g| BasinComponent {
            attractor: g.mus.iter().sum::<f64>() / g.mus.len() as f64,
            basis: g.basis,
        })
        .collect();
    components.sort_by(|a, b| a.attractor.total_cmp(&b.attractor));

    let decomposition = BasinDecomposition {
        components,
        escaped_dim,
        source_dim: d.dim(),
    };
    let covered: usize = decomposition.component_dims().iter().sum();
    assert_eq!(
        covered + decomposition.escaped_dim,
        decomposition.source_dim,
        "basin components and escaped weight must cover the source space"
    );
    Ok(decomposition)
}

/// Unitary equivalence of symmetric operators: equal dimension and equal
/// sorted eigenvalue lists with multiplicity, pairwise within `tol`.
pub fn compare_up_to_unitary(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    let ea = match eig_decompose(a, 0.0) {
        Ok(d) => d.raw_eigenvalues(),
        Err(_) => return false,
    };
    let eb = match eig_decompose(b, 0.0) {
        Ok(d) => d.raw_eigenvalues(),
        Err(_) => return false,
    };
    ea.iter().zip(eb.iter()).all(|(x, y)| (x - y).abs() <= tol)
}
