//! Ordinal-indexed iteration of Φ: successor steps, ω-limit bookkeeping,
//! stabilization detection under two equivalence modes, and the fixed-point
//! operator.
//!
//! Stages are ordinals of the form ω·k + n: finitely many Cauchy-limit
//! passes (`k`) with finite successor runs (`n`) between them. Strict
//! stabilization (one-step residual within ε at unchanged dimension) is
//! checked first on every step; the ω-limit detector engages only while it
//! never fires, which in practice means dimension-growing transforms.

use crate::operator::HermitianOperator;
use crate::spectral::{eig_decompose, op_distance};
use crate::transform::{Embedding, PhiError, PhiTransform};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

/// Consecutive aligned successor differences (each within ε, nonincreasing)
/// required before an ω-limit stage is recorded.
pub const OMEGA_WINDOW: usize = 8;
/// Largest stage dimension for which per-stage spectra are computed.
pub const SPECTRUM_DIM_CAP: usize = 64;

/// Ordinal token ω·k + n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    /// Number of ω-limits taken before this stage.
    pub omega_limits: u32,
    /// Successor steps since the last ω-limit (or since the start).
    pub step: u32,
}

impl Stage {
    pub fn finite(n: u32) -> Self {
        Stage {
            omega_limits: 0,
            step: n,
        }
    }

    pub fn omega_limit(k: u32) -> Self {
        Stage {
            omega_limits: k,
            step: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.omega_limits == 0
    }

    pub fn is_omega_limit(&self) -> bool {
        self.omega_limits > 0 && self.step == 0
    }

    fn advance(self) -> Self {
        Stage {
            omega_limits: self.omega_limits,
            step: self.step + 1,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.omega_limits, self.step) {
            (0, n) => write!(f, "{n}"),
            (1, 0) => write!(f, "w"),
            (1, n) => write!(f, "w+{n}"),
            (k, 0) => write!(f, "w*{k}"),
            (k, n) => write!(f, "w*{k}+{n}"),
        }
    }
}

/// How two operators on possibly different spaces are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquivalenceMode {
    #[serde(rename = "strict")]
    Strict,
    #[serde(rename = "modulo_trivial")]
    ModuloTrivialSummands,
}

impl std::str::FromStr for EquivalenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(EquivalenceMode::Strict),
            "modulo_trivial" => Ok(EquivalenceMode::ModuloTrivialSummands),
            other => Err(format!(
                "unknown equivalence mode `{other}` (expected `strict` or `modulo_trivial`)"
            )),
        }
    }
}

impl fmt::Display for EquivalenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivalenceMode::Strict => write!(f, "strict"),
            EquivalenceMode::ModuloTrivialSummands => write!(f, "modulo_trivial"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    /// Fixed-point tolerance ε.
    pub epsilon: f64,
    /// Max successor steps per ω-block.
    pub max_stages: usize,
    /// Max ω-limit stages.
    pub max_omega_limits: usize,
    /// Max operator dimension.
    pub space_budget: usize,
    pub mode: EquivalenceMode,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            epsilon: 1e-8,
            max_stages: 200,
            max_omega_limits: 3,
            space_budget: 4096,
            mode: EquivalenceMode::ModuloTrivialSummands,
        }
    }
}

/// One stage of the iteration. `residual` is the aligned one-step
/// difference measured *from* this stage (‖Φ(A_stage) − A_stage‖ after
/// zero-padding the smaller space); for the final stage of a stabilized run
/// it is the fixed-point residual under the equivalence mode, and it is NaN
/// when the run stopped before the comparison was made.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: Stage,
    pub operator: HermitianOperator,
    pub embedding_from_previous: Embedding,
    pub residual: f64,
    /// Raw sorted spectrum, for stages of dimension ≤ [`SPECTRUM_DIM_CAP`].
    pub spectrum: Option<Vec<f64>>,
}

/// The stabilized operator with its stage, residual, and full trace.
#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub a_infinity: HermitianOperator,
    pub stabilization_stage: Stage,
    pub final_residual: f64,
    pub equivalence_mode: EquivalenceMode,
    pub trace: Vec<StageRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StallReason {
    /// Successor budget for the current ω-block exhausted.
    StageBudget { max_stages: usize },
    /// All allowed ω-limit stages taken without stabilization.
    OmegaLimitBudget { max_omega_limits: usize },
    /// The next expansion would exceed the space budget.
    SpaceBudget { attempted: usize, budget: usize },
    /// A stage eigenvalue left the escape bound.
    Escaped { stage: Stage, lambda: f64 },
}

impl fmt::Display for StallReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StallReason::StageBudget { max_stages } => {
                write!(f, "stage budget exhausted ({max_stages} successor steps)")
            }
            StallReason::OmegaLimitBudget { max_omega_limits } => {
                write!(f, "omega-limit budget exhausted ({max_omega_limits})")
            }
            StallReason::SpaceBudget { attempted, budget } => {
                write!(
                    f,
                    "space budget exceeded (needed {attempted}, budget {budget})"
                )
            }
            StallReason::Escaped { stage, lambda } => {
                write!(
                    f,
                    "spectrum escaped at stage {stage} (eigenvalue {lambda:e})"
                )
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("iteration did not stabilize: {reason}")]
    NotStabilized {
        reason: StallReason,
        trace: Vec<StageRecord>,
    },
    #[error(transparent)]
    Phi(#[from] PhiError),
}

/// Sliding window over aligned successor differences; fires when the last
/// [`OMEGA_WINDOW`] diffs are all within ε and nonincreasing.
pub(crate) struct CauchyWindow {
    epsilon: f64,
    diffs: VecDeque<f64>,
}

impl CauchyWindow {
    pub(crate) fn new(epsilon: f64) -> Self {
        CauchyWindow {
            epsilon,
            diffs: VecDeque::with_capacity(OMEGA_WINDOW),
        }
    }

    pub(crate) fn push(&mut self, diff: f64) -> bool {
        if self.diffs.len() == OMEGA_WINDOW {
            self.diffs.pop_front();
        }
        self.diffs.push_back(diff);
        if self.diffs.len() < OMEGA_WINDOW {
            return false;
        }
        let mut prev = f64::INFINITY;
        for &d in &self.diffs {
            if d.is_nan() || d > self.epsilon || d > prev {
                return false;
            }
            prev = d;
        }
        true
    }

    pub(crate) fn reset(&mut self) {
        self.diffs.clear();
    }
}

fn stage_spectrum(op: &HermitianOperator) -> Option<Vec<f64>> {
    if op.dim() > SPECTRUM_DIM_CAP {
        return None;
    }
    eig_decompose(op, 0.0).ok().map(|d| d.raw_eigenvalues())
}

fn escaped_eigenvalue(
    op: &HermitianOperator,
    spectrum: Option<&Vec<f64>>,
    bound: f64,
) -> Option<f64> {
    if let Some(values) = spectrum {
        return values.iter().copied().find(|l| l.abs() > bound);
    }
    // No spectrum at this dimension: any entry exceeding the bound already
    // certifies an eigenvalue beyond it (|a_ij| ≤ ‖A‖₂ for symmetric A).
    if op.mat().max_abs() > bound {
        return Some(op.mat().max_abs());
    }
    None
}

/// Strip the maximal trailing identity summand lying outside the protected
/// leading subspace: rows `i ≥ protected_dim` with `a_ii ≈ 1` and all
/// off-row couplings ≈ 0 (within `tol`) are removed from the end. At least
/// one dimension is always kept.
pub fn canonical_form_modulo_trivial(
    a: &HermitianOperator,
    protected_dim: usize,
    tol: f64,
) -> HermitianOperator {
    assert!(protected_dim <= a.dim());
    let n = a.dim();
    let floor = protected_dim.max(1);
    let mut keep = n;
    while keep > floor {
        let i = keep - 1;
        let diag_ok = (a.entry(i, i) - 1.0).abs() <= tol;
        let row_ok =
            (0..n).all(|j| j == i || (a.entry(i, j).abs() <= tol && a.entry(j, i).abs() <= tol));
        if diag_ok && row_ok {
            keep -= 1;
        } else {
            break;
        }
    }
    if keep == n {
        a.clone()
    } else {
        HermitianOperator::from_symmetric_mat(a.mat().leading_principal(keep), a.sym_tol())
    }
}

/// Fixed-point residual of `a` under `t` in the given mode. Returns the
/// `+∞` sentinel when the images are not comparable (dimension change in
/// strict mode, or a failed application).
pub fn check_fixed_point(
    t: &PhiTransform,
    a: &HermitianOperator,
    mode: EquivalenceMode,
    tol: f64,
) -> f64 {
    let (image, _) = match t.apply_unbounded(a) {
        Ok(x) => x,
        Err(_) => return f64::INFINITY,
    };
    match mode {
        EquivalenceMode::Strict => {
            if image.dim() != a.dim() {
                f64::INFINITY
            } else {
                op_distance(&image, a)
            }
        }
        EquivalenceMode::ModuloTrivialSummands => {
            let stripped = canonical_form_modulo_trivial(&image, a.dim(), tol);
            if stripped.dim() != a.dim() {
                f64::INFINITY
            } else {
                op_distance(&stripped, a)
            }
        }
    }
}

/// Run successor steps `A_{n+1} = Φ(A_n)` until stabilization.
///
/// Strict stabilization (residual ≤ ε at unchanged dimension) returns the
/// current stage operator. In `ModuloTrivialSummands` mode an expansion
/// whose image equals the current operator plus a trailing identity
/// summand stabilizes one stage later, keeping the adjoined summand in the
/// fixed point. While neither fires, a window of small nonincreasing
/// aligned differences records an ω-limit stage (the last iterate) and the
/// run resumes from it, up to the configured number of ω-limits.
pub fn iterate_to_fixed_point(
    t: &PhiTransform,
    a0: &HermitianOperator,
    cfg: &IterationConfig,
) -> Result<FixedPointResult, EngineError> {
    assert!(cfg.epsilon > 0.0, "epsilon must be positive");
    assert!(cfg.max_stages >= 1, "max_stages must be at least 1");

    let escape_bound = t.escape_bound();
    let mut stage = Stage::finite(0);
    let mut cur = a0.clone();
    let mut trace = vec![StageRecord {
        stage,
        operator: cur.clone(),
        embedding_from_previous: Embedding::identity(cur.dim()),
        residual: f64::NAN,
        spectrum: stage_spectrum(&cur),
    }];
    let mut omega_taken: u32 = 0;
    let mut steps_in_block: usize = 0;
    let mut window = CauchyWindow::new(cfg.epsilon);

    loop {
        let (next, emb) = match t.apply(&cur, cfg.space_budget) {
            Ok(x) => x,
            Err(PhiError::DimensionOverflow { attempted, budget }) => {
                return Err(EngineError::NotStabilized {
                    reason: StallReason::SpaceBudget { attempted, budget },
                    trace,
                });
            }
            Err(e) => return Err(e.into()),
        };
        let aligned_prev = emb.extend_operator(&cur);
        let diff = op_distance(&next, &aligned_prev);
        if let Some(last) = trace.last_mut() {
            last.residual = diff;
        }

        // Strict stabilization is checked first on every step.
        if next.dim() == cur.dim() && diff <= cfg.epsilon {
            return Ok(FixedPointResult {
                a_infinity: cur,
                stabilization_stage: stage,
                final_residual: diff,
                equivalence_mode: cfg.mode,
                trace,
            });
        }

        // Expansion that only adjoined a trivial summand: the image is the
        // fixed point, adjoined block included.
        if cfg.mode == EquivalenceMode::ModuloTrivialSummands && next.dim() > cur.dim() {
            let stripped = canonical_form_modulo_trivial(&next, cur.dim(), cfg.epsilon);
            if stripped.dim() == cur.dim() && op_distance(&stripped, &cur) <= cfg.epsilon {
                let final_residual = check_fixed_point(t, &next, cfg.mode, cfg.epsilon);
                if final_residual <= cfg.epsilon {
                    let next_stage = stage.advance();
                    let spectrum = stage_spectrum(&next);
                    trace.push(StageRecord {
                        stage: next_stage,
                        operator: next.clone(),
                        embedding_from_previous: emb,
                        residual: final_residual,
                        spectrum,
                    });
                    return Ok(FixedPointResult {
                        a_infinity: next,
                        stabilization_stage: next_stage,
                        final_residual,
                        equivalence_mode: cfg.mode,
                        trace,
                    });
                }
            }
        }

        stage = stage.advance();
        let spectrum = stage_spectrum(&next);

        if let Some(bound) = escape_bound {
            if let Some(lambda) = escaped_eigenvalue(&next, spectrum.as_ref(), bound) {
                trace.push(StageRecord {
                    stage,
                    operator: next,
                    embedding_from_previous: emb,
                    residual: f64::INFINITY,
                    spectrum,
                });
                return Err(EngineError::NotStabilized {
                    reason: StallReason::Escaped { stage, lambda },
                    trace,
                });
            }
        }

        trace.push(StageRecord {
            stage,
            operator: next.clone(),
            embedding_from_previous: emb,
            residual: f64::NAN,
            spectrum,
        });
        cur = next;
        steps_in_block += 1;

        // ω-limit: the successor differences went Cauchy without the mode
        // residual ever firing. Record the last iterate as the limit stage
        // and resume successor steps from it.
        if window.push(diff) {
            if (omega_taken as usize) >= cfg.max_omega_limits {
                return Err(EngineError::NotStabilized {
                    reason: StallReason::OmegaLimitBudget {
                        max_omega_limits: cfg.max_omega_limits,
                    },
                    trace,
                });
            }
            omega_taken += 1;
            stage = Stage::omega_limit(omega_taken);
            trace.push(StageRecord {
                stage,
                operator: cur.clone(),
                embedding_from_previous: Embedding::identity(cur.dim()),
                residual: f64::NAN,
                spectrum: stage_spectrum(&cur),
            });
            steps_in_block = 0;
            window.reset();
            continue;
        }

        if steps_in_block >= cfg.max_stages {
            return Err(EngineError::NotStabilized {
                reason: StallReason::StageBudget {
                    max_stages: cfg.max_stages,
                },
                trace,
            });
        }
    }
}
