//! Continuous-time and shift-space constructions: `e^{tA}` and its
//! long-time projection limit, Yosida-style power limits, the truncated
//! Koopman shift over a Φ-trace, and the grid right-shift semigroup.

use crate::engine::Stage;
use crate::maps::Interval;
use crate::mat::Mat;
use crate::operator::HermitianOperator;
use crate::spectral::{operator_norm, SpectralDecomposition};
use crate::transform::{PhiTransform, TransformKind};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

/// Eigenvalues within this band of zero count as kernel.
pub const KERNEL_TOL: f64 = 1e-10;
/// Slack on the Yosida hypothesis `1 + t0·λ ∈ (0, 1]` for eigenvalues that
/// are numerically zero.
const HYPOTHESIS_SLACK: f64 = 1e-12;
/// Largest exponent argument that keeps `exp` finite.
const EXP_ARG_MAX: f64 = 709.0;

#[derive(Debug, Error)]
pub enum SemigroupError {
    #[error("semigroup time must be nonnegative, got {t}")]
    NegativeTime { t: f64 },
    #[error("t·λ = {arg} exceeds the floating-point exponent range")]
    Overflow { arg: f64 },
    #[error("not a contraction generator: max eigenvalue {lambda_max} > {tol}")]
    NotContraction { lambda_max: f64, tol: f64 },
    #[error("Yosida hypothesis violated: 1 + t0·λ = {shifted} for eigenvalue {lambda} (need a value in (0, 1])")]
    HypothesisViolation { lambda: f64, shifted: f64 },
    #[error("Koopman assembly requires a dimension-preserving scalar transform, got `{label}`")]
    ShapeMismatch { label: String },
    #[error("Koopman truncation requires at least 2 blocks, got {blocks}")]
    TooFewBlocks { blocks: usize },
    #[error("shift {s} is not a nonnegative multiple of the grid step {step}")]
    NotGridAligned { s: f64, step: f64 },
    #[error("shift by {dropped} samples consumes the whole grid ({len} samples)")]
    EmptyResult { dropped: usize, len: usize },
    #[error("grid function at {path}: {msg}")]
    GridFormat { path: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Phi(#[from] crate::transform::PhiError),
}

/// `T(t) = e^{tA}` via the functional calculus.
pub fn semigroup_at(
    d: &SpectralDecomposition,
    t: f64,
) -> Result<HermitianOperator, SemigroupError> {
    if t < 0.0 {
        return Err(SemigroupError::NegativeTime { t });
    }
    for lam in d.eigenvalues() {
        let arg = t * lam;
        if arg > EXP_ARG_MAX {
            return Err(SemigroupError::Overflow { arg });
        }
    }
    Ok(d.apply_fn("exp", |x| (t * x).exp())
        .expect("exp is finite on the checked range"))
}

/// Long-time limit of a contraction semigroup: the kernel projection
/// `P = E([-tol, tol])` and the spectral gap `-max{λ : λ < -tol}`, which
/// controls the decay `‖e^{tA} − P‖ ≤ e^{-gap·t}`.
pub fn semigroup_limit(
    d: &SpectralDecomposition,
    tol: f64,
) -> Result<(HermitianOperator, f64), SemigroupError> {
    let lambda_max = d.max_eigenvalue();
    if lambda_max > tol {
        return Err(SemigroupError::NotContraction { lambda_max, tol });
    }
    let p = d.spectral_projection(Interval::new(-tol, tol));
    let gap = d
        .eigenvalues()
        .into_iter()
        .filter(|&l| l < -tol)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = if gap.is_finite() { -gap } else { 0.0 };
    Ok((p, gap))
}

/// Power limit `(I + t0·A)ⁿ → P` onto the kernel, valid in the regime
/// `1 + t0·λ ∈ (0, 1]` for every eigenvalue. Returns the first power
/// within `tol` of the kernel projection, or `None` with the `n_max`-th
/// power.
pub fn yosida_power_limit(
    d: &SpectralDecomposition,
    t0: f64,
    n_max: usize,
    tol: f64,
) -> Result<(HermitianOperator, Option<usize>), SemigroupError> {
    assert!(t0 > 0.0, "t0 must be positive");
    assert!(n_max >= 1, "n_max must be at least 1");
    for lam in d.eigenvalues() {
        let shifted = 1.0 + t0 * lam;
        if !(shifted > 0.0 && shifted <= 1.0 + HYPOTHESIS_SLACK) {
            return Err(SemigroupError::HypothesisViolation {
                lambda: lam,
                shifted,
            });
        }
    }
    let kernel = d.spectral_projection(Interval::new(-KERNEL_TOL, KERNEL_TOL));
    let mut last = None;
    for n in 1..=n_max {
        let power = d
            .apply_fn("yosida-power", |x| (1.0 + t0 * x).powi(n as i32))
            .expect("powers of values in (0,1] are finite");
        let dist = crate::spectral::op_distance(&power, &kernel);
        if dist <= tol {
            return Ok((power, Some(n)));
        }
        last = Some(power);
    }
    Ok((last.expect("n_max >= 1"), None))
}

/// The truncated Koopman shift over the first `N` slots of a Φ-trace: a
/// strictly lower block-triangular `(N·d) × (N·d)` matrix whose only
/// nonzero blocks sit on the first subdiagonal, block `(n, n-1)` being the
/// one-step map applied between slot n−1 and slot n.
#[derive(Debug, Clone)]
pub struct KoopmanBlockOperator {
    block_count: usize,
    block_dim: usize,
    matrix: Mat,
}

impl KoopmanBlockOperator {
    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.block_count * self.block_dim
    }

    /// Apply to a flat truncated sequence (x₀,…,x_{N−1}).
    pub fn apply_flat(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    /// Apply to a sequence of slot vectors.
    pub fn apply_blocks(&self, slots: &[Vec<f64>]) -> Vec<Vec<f64>> {
        assert_eq!(slots.len(), self.block_count);
        let flat: Vec<f64> = slots.iter().flatten().copied().collect();
        let out = self.apply_flat(&flat);
        out.chunks(self.block_dim).map(|c| c.to_vec()).collect()
    }

    /// True when every block off the first subdiagonal is exactly zero.
    pub fn is_strictly_lower_block_shift(&self) -> bool {
        let (n, d) = (self.block_count, self.block_dim);
        for bi in 0..n {
            for bj in 0..n {
                if bj + 1 == bi {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        if self.matrix.get(bi * d + i, bj * d + j) != 0.0 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Max-abs entry of `matrixᴺ`; zero (exactly) by nilpotency.
    pub fn nilpotency_defect(&self) -> f64 {
        let mut power = Mat::identity(self.dim());
        for _ in 0..self.block_count {
            power = power.matmul(&self.matrix);
        }
        power.max_abs()
    }

    /// Spectral-norm estimate of the truncated shift.
    pub fn norm_estimate(&self) -> f64 {
        operator_norm(&self.matrix)
    }
}

/// Assemble the truncated Koopman shift for a scalar transform: block
/// `(n, n-1)` is the stage-(n−1) operator of the Φ-trace from `a`.
pub fn koopman_shift_truncated(
    t: &PhiTransform,
    a: &HermitianOperator,
    blocks: usize,
) -> Result<KoopmanBlockOperator, SemigroupError> {
    if blocks < 2 {
        return Err(SemigroupError::TooFewBlocks { blocks });
    }
    if !matches!(t.kind(), TransformKind::ScalarMap(_)) {
        return Err(SemigroupError::ShapeMismatch {
            label: t.label().to_string(),
        });
    }
    let d = a.dim();
    // Stage operators A_0 .. A_{N-2}: the maps applied between consecutive
    // slots.
    let mut stage_ops = Vec::with_capacity(blocks - 1);
    let mut cur = a.clone();
    for _ in 0..(blocks - 1) {
        stage_ops.push(cur.clone());
        let (next, _) = t.apply_unbounded(&cur)?;
        cur = next;
    }

    let n = blocks * d;
    let mut matrix = Mat::zeros(n, n);
    for (k, op) in stage_ops.iter().enumerate() {
        // Block row k+1, block column k.
        for i in 0..d {
            for j in 0..d {
                matrix.set((k + 1) * d + i, k * d + j, op.entry(i, j));
            }
        }
    }
    Ok(KoopmanBlockOperator {
        block_count: blocks,
        block_dim: d,
        matrix,
    })
}

/// An `H`-valued function sampled on the uniform grid t = 0, h, 2h, ….
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    step: f64,
    samples: Vec<Vec<f64>>,
}

impl GridFunction {
    /// Panics on an empty sample list, ragged samples, or a nonpositive
    /// step.
    pub fn new(step: f64, samples: Vec<Vec<f64>>) -> Self {
        assert!(step > 0.0, "grid step must be positive");
        assert!(
            !samples.is_empty(),
            "grid function needs at least one sample"
        );
        let dim = samples[0].len();
        assert!(
            samples.iter().all(|s| s.len() == dim),
            "all samples must share one dimension"
        );
        GridFunction { step, samples }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty() // construction guarantees at least one sample
    }

    pub fn value_dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }
}

/// Right-shift semigroup on grid functions: `(U(s)f)(t) = f(t + s)` for a
/// grid-aligned `s`, dropping the first `s/h` samples.
pub fn shift_evolution(f: &GridFunction, s: f64) -> Result<GridFunction, SemigroupError> {
    if s < 0.0 || !s.is_finite() {
        return Err(SemigroupError::NotGridAligned { s, step: f.step() });
    }
    let ratio = s / f.step();
    let k = ratio.round();
    if (ratio - k).abs() > 1e-9 {
        return Err(SemigroupError::NotGridAligned { s, step: f.step() });
    }
    let k = k as usize;
    if k >= f.len() {
        return Err(SemigroupError::EmptyResult {
            dropped: k,
            len: f.len(),
        });
    }
    Ok(GridFunction {
        step: f.step(),
        samples: f.samples()[k..].to_vec(),
    })
}

/// Write a grid function as CSV with header `t,v0,...,v{d-1}`.
pub fn write_grid_csv(f: &GridFunction, path: &Path) -> Result<(), SemigroupError> {
    let mut out = std::fs::File::create(path)?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..f.value_dim()).map(|i| format!("v{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (i, sample) in f.samples().iter().enumerate() {
        let mut row = vec![format!("{}", i as f64 * f.step())];
        row.extend(sample.iter().map(|v| format!("{v}")));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a grid function back from the CSV format of [`write_grid_csv`].
/// The step is inferred from the first two t values (1.0 for a single row).
pub fn read_grid_csv(path: &Path) -> Result<GridFunction, SemigroupError> {
    let fmt_err = |msg: String| SemigroupError::GridFormat {
        path: path.display().to_string(),
        msg,
    };
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| fmt_err("missing header".to_string()))?;
    let cols = header.split(',').count();
    if cols < 2 || !header.starts_with("t,") {
        return Err(fmt_err("header must be t,v0,...".to_string()));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(fmt_err(format!(
                "row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                cols
            )));
        }
        let mut values = Vec::with_capacity(cols);
        for f in &fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| fmt_err(format!("bad number `{f}` on row {}", lineno + 2)))?;
            values.push(v);
        }
        times.push(values[0]);
        samples.push(values[1..].to_vec());
    }
    if samples.is_empty() {
        return Err(fmt_err("no sample rows".to_string()));
    }
    let step = if times.len() >= 2 {
        times[1] - times[0]
    } else {
        1.0
    };
    if step <= 0.0 {
        return Err(fmt_err("t column must be strictly increasing".to_string()));
    }
    for (i, pair) in times.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - step).abs() > 1e-9 * step.max(1.0) {
            return Err(fmt_err(format!(
                "non-uniform grid between rows {} and {}",
                i + 2,
                i + 3
            )));
        }
    }
    Ok(GridFunction::new(step, samples))
}

/// Stage token for a slot of the truncated shift, for report labeling.
pub fn slot_stage(n: usize) -> Stage {
    Stage::finite(n as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::SpectralMap;
    use crate::spectral::{eig_decompose, op_distance};

    #[test]
    fn semigroup_at_diagonal_values() {
        let a = HermitianOperator::diag(&[0.0, -1.0]);
        let d = eig_decompose(&a, 0.0).unwrap();
        let e1 = semigroup_at(&d, 1.0).unwrap();
        assert!((e1.entry(0, 0) - 1.0).abs() < 1e-15);
        assert!((e1.entry(1, 1) - (-1.0_f64).exp()).abs() < 1e-15);
        let e0 = semigroup_at(&d, 0.0).unwrap();
        assert!(e0.approx_eq(&HermitianOperator::identity(2), 1e-15));
    }

    #[test]
    fn semigroup_law_on_diagonal() {
        let a = HermitianOperator::diag(&[-2.0]);
        let d = eig_decompose(&a, 0.0).unwrap();
        let half = semigroup_at(&d, 0.5).unwrap();
        let full = semigroup_at(&d, 1.0).unwrap();
        let composed = HermitianOperator::from_symmetric_mat(
            half.mat().matmul(half.mat()),
            crate::operator::DEFAULT_SYM_TOL,
        );
        assert!(op_distance(&composed, &full) <= 1e-12);
    }

    #[test]
    fn semigroup_rejects_negative_time_and_overflow() {
        let a = HermitianOperator::diag(&[1.0]);
        let d = eig_decompose(&a, 0.0).unwrap();
        assert!(matches!(
            semigroup_at(&d, -1.0),
            Err(SemigroupError::NegativeTime { .. })
        ));
        assert!(matches!(
            semigroup_at(&d, 1e4),
            Err(SemigroupError::Overflow { .. })
        ));
    }

    #[test]
    fn semigroup_limit_kernel_and_gap() {
        let a = HermitianOperator::diag(&[0.0, -1.0, -2.0]);
        let d = eig_decompose(&a, 0.0).unwrap();
        let (p, gap) = semigroup_limit(&d, KERNEL_TOL).unwrap();
        assert_eq!(p.mat(), HermitianOperator::diag(&[1.0, 0.0, 0.0]).mat());
        assert!((gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn semigroup_limit_zero_operator() {
        let a = HermitianOperator::zero(2);
        let d = eig_decompose(&a, 0.0).unwrap();
        let (p, gap) = semigroup_limit(&d, KERNEL_TOL).unwrap();
        assert!(p.approx_eq(&HermitianOperator::identity(2), 1e-14));
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn semigroup_limit_rejects_positive_spectrum() {
        let a = HermitianOperator::diag(&[0.5, -1.0]);
        let d = eig_decompose(&a, 0.0).unwrap();
        assert!(matches!(
            semigroup_limit(&d, KERNEL_TOL),
            Err(SemigroupError::NotContraction { .. })
        ));
    }

    #[test]
    fn yosida_power_limit_frozen_example() {
        // Oracle: 0.5^n first dips below 1e-8 at n = 27.
        let a = HermitianOperator::diag(&[0.0, -0.5]);
        let d = eig_decompose(&a, 0.0).unwrap();
        let (limit, converged_at) = yosida_power_limit(&d, 1.0, 100, 1e-8).unwrap();
        assert_eq!(converged_at, Some(27));
        assert!(limit.approx_eq(&HermitianOperator::diag(&[1.0, 0.0]), 1e-8));
    }

    #[test]
    fn yosida_zero_operator_converges_at_one() {
        let a = HermitianOperator::zero(2);
        let d = eig_decompose(&a, 0.0).unwrap();
        let (limit, converged_at) = yosida_power_limit(&d, 1.0, 10, 1e-8).unwrap();
        assert_eq!(converged_at, Some(1));
        assert!(limit.approx_eq(&HermitianOperator::identity(2), 1e-14));
    }

    #[test]
    fn yosida_hypothesis_violation() {
        let a = HermitianOperator::diag(&[-1.5]);
        let d = eig_decompose(&a, 0.0).unwrap();
        let err = yosida_power_limit(&d, 1.0, 10, 1e-8).unwrap_err();
        match err {
            SemigroupError::HypothesisViolation { shifted, .. } => {
                assert!((shifted + 0.5).abs() < 1e-12)
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn yosida_not_converged_within_budget() {
        let a = HermitianOperator::diag(&[0.0, -0.5]);
        let d = eig_decompose(&a, 0.0).unwrap();
        let (_, converged_at) = yosida_power_limit(&d, 1.0, 5, 1e-8).unwrap();
        assert_eq!(converged_at, None);
    }

    #[test]
    fn koopman_scalar_example() {
        // N=3, square map, A = diag(1): subdiagonal entries all 1.
        let t = PhiTransform::scalar(SpectralMap::square()).unwrap();
        let a = HermitianOperator::diag(&[1.0]);
        let k = koopman_shift_truncated(&t, &a, 3).unwrap();
        assert_eq!(k.dim(), 3);
        assert!(k.is_strictly_lower_block_shift());
        assert_eq!(k.matrix().get(1, 0), 1.0);
        assert_eq!(k.matrix().get(2, 1), 1.0);
        let shifted = k.apply_flat(&[1.0, 1.0, 1.0]);
        assert_eq!(shifted, vec![0.0, 1.0, 1.0]);
        assert_eq!(k.nilpotency_defect(), 0.0);
    }

    #[test]
    fn koopman_stable_sequence_is_shifted_not_fixed() {
        let t = PhiTransform::scalar(SpectralMap::square()).unwrap();
        let a = HermitianOperator::diag(&[1.0, 0.5]);
        let k = koopman_shift_truncated(&t, &a, 4).unwrap();
        // x0 = e1 spans the stable subspace: every stage operator fixes it
        // exactly (the stage operators stay diagonal).
        let x0 = vec![1.0, 0.0];
        let constant: Vec<Vec<f64>> = (0..4).map(|_| x0.clone()).collect();
        let image = k.apply_blocks(&constant);
        assert_eq!(image[0], vec![0.0, 0.0]);
        for slot in &image[1..] {
            assert_eq!(slot, &x0, "stable sequence must shift bit-for-bit");
        }
        // The prepended zero means the image is NOT the input: the constant
        // sequence is not an eigenvector of the truncated shift.
        assert_ne!(image, constant);
    }

    #[test]
    fn koopman_rejects_bad_inputs() {
        let a = HermitianOperator::diag(&[1.0]);
        let t = PhiTransform::scalar(SpectralMap::square()).unwrap();
        assert!(matches!(
            koopman_shift_truncated(&t, &a, 1),
            Err(SemigroupError::TooFewBlocks { blocks: 1 })
        ));
        let ds = PhiTransform::direct_sum_identity();
        assert!(matches!(
            koopman_shift_truncated(&ds, &a, 3),
            Err(SemigroupError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn shift_evolution_drops_leading_samples() {
        let f = GridFunction::new(1.0, vec![vec![0.0], vec![1.0], vec![2.0]]);
        let g = shift_evolution(&f, 1.0).unwrap();
        assert_eq!(g.samples(), &[vec![1.0], vec![2.0]]);
        let same = shift_evolution(&f, 0.0).unwrap();
        assert_eq!(same, f);
        // Semigroup law holds exactly.
        let twice = shift_evolution(&shift_evolution(&f, 1.0).unwrap(), 1.0).unwrap();
        let once = shift_evolution(&f, 2.0).unwrap();
        assert_eq!(twice, once);
    }

    #[test]
    fn shift_evolution_errors() {
        let f = GridFunction::new(0.5, vec![vec![0.0], vec![1.0]]);
        assert!(matches!(
            shift_evolution(&f, 0.3),
            Err(SemigroupError::NotGridAligned { .. })
        ));
        assert!(matches!(
            shift_evolution(&f, 1.0),
            Err(SemigroupError::EmptyResult { dropped: 2, len: 2 })
        ));
        assert!(matches!(
            shift_evolution(&f, -0.5),
            Err(SemigroupError::NotGridAligned { .. })
        ));
    }

    #[test]
    fn grid_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let f = GridFunction::new(0.5, vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        write_grid_csv(&f, &path).unwrap();
        let g = read_grid_csv(&path).unwrap();
        assert_eq!(f, g);
    }
}
