//! Finite-dimensional spectral theorem: cyclic-Jacobi eigendecomposition of
//! symmetric operators into eigenvalue clusters with orthogonal spectral
//! projections, and the scalar functional calculus built on top of it.
//!
//! The Jacobi method is a sequence of plane rotations, each annihilating one
//! off-diagonal element; accumulating the rotations yields an orthonormal
//! eigenvector basis. It is slower than QR for large matrices but its
//! eigenvectors are orthogonal to working precision, which is what the
//! projection algebra downstream cares about. A fixed sweep budget guards
//! against pathological non-convergence.

use crate::maps::{Interval, SpectralMap};
use crate::mat::Mat;
use crate::operator::HermitianOperator;
use thiserror::Error;

/// Default sweep budget for the Jacobi eigensolver.
pub const DEFAULT_JACOBI_SWEEPS: usize = 100;
/// Default absolute tolerance for merging near-degenerate eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Largest dimension for which norms go through a full eigendecomposition;
/// above this a deterministic power iteration is used instead.
pub const NORM_EIG_DIM_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(
        "Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off:e})"
    )]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("map `{map}` is undefined or non-finite at eigenvalue {lambda}")]
    Domain { lambda: f64, map: String },
}

/// One eigenvalue cluster: near-degenerate eigenvalues merged into a single
/// spectral projection.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    /// Representative eigenvalue (mean of the merged raw eigenvalues).
    pub value: f64,
    /// The raw eigenvalues merged into this cluster, ascending.
    pub members: Vec<f64>,
    /// Orthonormal basis of the cluster eigenspace.
    pub basis: Vec<Vec<f64>>,
    /// Orthogonal projection onto the cluster eigenspace.
    pub projection: Mat,
}

impl SpectralCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Clustered eigendecomposition `A = Σ_j λ_j P_j` of a symmetric operator:
/// ascending distinct eigenvalues with orthogonal projections that resolve
/// the identity.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    dim: usize,
    cluster_tol: f64,
    clusters: Vec<SpectralCluster>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn clusters(&self) -> &[SpectralCluster] {
        &self.clusters
    }

    /// Distinct (clustered) eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    /// Raw eigenvalues with multiplicity, ascending.
    pub fn raw_eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .clusters
            .iter()
            .flat_map(|c| c.members.iter().copied())
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn projections(&self) -> Vec<&Mat> {
        self.clusters.iter().map(|c| &c.projection).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.clusters.first().map(|c| c.value).unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.clusters.last().map(|c| c.value).unwrap_or(0.0)
    }

    /// `Σ_j λ_j P_j`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let mut m = Mat::zeros(self.dim, self.dim);
        for c in &self.clusters {
            m.axpy(c.value, &c.projection);
        }
        HermitianOperator::from_symmetric_mat(m, crate::operator::DEFAULT_SYM_TOL)
    }

    /// Functional calculus `f(A) = Σ_j f(λ_j) P_j` for a scalar map; errors
    /// if some eigenvalue falls outside the map domain or maps to a
    /// non-finite value.
    pub fn apply_calculus(&self, f: &SpectralMap) -> Result<HermitianOperator, SpectralError> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for c in &self.clusters {
            if !f.domain().contains(c.value) {
                return Err(SpectralError::Domain {
                    lambda: c.value,
                    map: f.name().to_string(),
                });
            }
            let fx = f.eval(c.value);
            if !fx.is_finite() {
                return Err(SpectralError::Domain {
                    lambda: c.value,
                    map: f.name().to_string(),
                });
            }
            m.axpy(fx, &c.projection);
        }
        Ok(HermitianOperator::from_symmetric_mat(
            m,
            crate::operator::DEFAULT_SYM_TOL,
        ))
    }

    /// Functional calculus for a plain closure; `name` is only used in
    /// error messages.
    pub fn apply_fn(
        &self,
        name: &str,
        f: impl Fn(f64) -> f64,
    ) -> Result<HermitianOperator, SpectralError> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for c in &self.clusters {
            let fx = f(c.value);
            if !fx.is_finite() {
                return Err(SpectralError::Domain {
                    lambda: c.value,
                    map: name.to_string(),
                });
            }
            m.axpy(fx, &c.projection);
        }
        Ok(HermitianOperator::from_symmetric_mat(
            m,
            crate::operator::DEFAULT_SYM_TOL,
        ))
    }

    /// Spectral projection `E(Δ) = Σ {P_j : λ_j ∈ Δ}`; the empty selection
    /// yields the zero operator.
    pub fn spectral_projection(&self, interval: Interval) -> HermitianOperator {
        let mut m = Mat::zeros(self.dim, self.dim);
        for c in &self.clusters {
            if interval.contains(c.value) {
                m.axpy(1.0, &c.projection);
            }
        }
        HermitianOperator::from_symmetric_mat(m, crate::operator::DEFAULT_SYM_TOL)
    }
}

/// Decompose a symmetric operator with the default sweep budget.
pub fn eig_decompose(
    a: &HermitianOperator,
    cluster_tol: f64,
) -> Result<SpectralDecomposition, SpectralError> {
    eig_decompose_with(a, cluster_tol, DEFAULT_JACOBI_SWEEPS)
}

/// Decompose with an explicit sweep budget.
pub fn eig_decompose_with(
    a: &HermitianOperator,
    cluster_tol: f64,
    max_sweeps: usize,
) -> Result<SpectralDecomposition, SpectralError> {
    assert!(cluster_tol >= 0.0, "cluster_tol must be nonnegative");
    let n = a.dim();
    let (values, vectors) = jacobi_eigen(a.mat(), max_sweeps)?;

    // Sort eigenpairs ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));

    // Chain-merge: a new cluster starts when the gap to the previous raw
    // eigenvalue exceeds cluster_tol.
    let mut clusters: Vec<SpectralCluster> = Vec::new();
    let mut members: Vec<f64> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let flush =
        |members: &mut Vec<f64>, basis: &mut Vec<Vec<f64>>, out: &mut Vec<SpectralCluster>| {
            if members.is_empty() {
                return;
            }
            let value = members.iter().sum::<f64>() / members.len() as f64;
            let projection = projection_from_basis(n, basis);
            out.push(SpectralCluster {
                value,
                members: std::mem::take(members),
                basis: std::mem::take(basis),
                projection,
            });
        };
    for &idx in &order {
        let lam = values[idx];
        if let Some(&last) = members.last() {
            if lam - last > cluster_tol {
                flush(&mut members, &mut basis, &mut clusters);
            }
        }
        members.push(lam);
        basis.push(vectors.col(idx));
    }
    flush(&mut members, &mut basis, &mut clusters);

    Ok(SpectralDecomposition {
        dim: n,
        cluster_tol,
        clusters,
    })
}

/// Free-function form of the calculus, matching the decomposition method.
pub fn apply_calculus(
    d: &SpectralDecomposition,
    f: &SpectralMap,
) -> Result<HermitianOperator, SpectralError> {
    d.apply_calculus(f)
}

/// Free-function form of the spectral projection.
pub fn spectral_projection(d: &SpectralDecomposition, interval: Interval) -> HermitianOperator {
    d.spectral_projection(interval)
}

/// `P = Σ v vᵀ` over an orthonormal basis, assembled exactly symmetric.
fn projection_from_basis(n: usize, basis: &[Vec<f64>]) -> Mat {
    let mut p = Mat::zeros(n, n);
    for v in basis {
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate().skip(i) {
                let contrib = vi * vj;
                p.set(i, j, p.get(i, j) + contrib);
                if i != j {
                    p.set(j, i, p.get(i, j));
                }
            }
        }
    }
    // Mirror once more so the two triangles are bitwise identical even
    // after repeated accumulation.
    for i in 0..n {
        for j in (i + 1)..n {
            p.set(j, i, p.get(i, j));
        }
    }
    p
}

/// Cyclic Jacobi: returns unsorted eigenvalues and the matrix whose columns
/// are the matching orthonormal eigenvectors. Exactly diagonal inputs pass
/// through without a single rotation, so their eigenpairs are bit-exact.
pub fn jacobi_eigen(m: &Mat, max_sweeps: usize) -> Result<(Vec<f64>, Mat), SpectralError> {
    assert!(m.is_square());
    let n = m.rows();
    // Work on the symmetrized matrix; for exactly symmetric input this is
    // the identity on entries.
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let x = m.get(i, j);
            let y = m.get(j, i);
            a.set(i, j, if x == y { x } else { 0.5 * (x + y) });
        }
    }
    let mut v = Mat::identity(n);
    if n == 1 {
        return Ok((vec![a.get(0, 0)], v));
    }

    let fro = a.frobenius_norm();
    let tol = f64::EPSILON * fro;

    for _sweep in 0..max_sweeps {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let x = a.get(p, q);
                off_sq += 2.0 * x * x;
            }
        }
        if off_sq.sqrt() <= tol {
            let values = (0..n).map(|i| a.get(i, i)).collect();
            return Ok((values, v));
        }

        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                // Negligible relative to the diagonal: zero it and move on.
                if 100.0 * apq.abs() <= f64::EPSILON * app.abs()
                    && 100.0 * apq.abs() <= f64::EPSILON * aqq.abs()
                {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1.0 / f64::EPSILON.sqrt() {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;

                a.set(p, p, app - h);
                a.set(q, q, aqq + h);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    let new_kp = akp - s * (akq + akp * tau);
                    let new_kq = akq + s * (akp - akq * tau);
                    a.set(k, p, new_kp);
                    a.set(p, k, new_kp);
                    a.set(k, q, new_kq);
                    a.set(q, k, new_kq);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp - s * (vkq + vkp * tau));
                    v.set(k, q, vkq + s * (vkp - vkq * tau));
                }
            }
        }
    }

    let mut off_sq = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let x = a.get(p, q);
            off_sq += 2.0 * x * x;
        }
    }
    Err(SpectralError::NoConvergence {
        sweeps: max_sweeps,
        off: off_sq.sqrt(),
    })
}

/// Spectral (2-)norm of a symmetric matrix: max |eigenvalue|, from the
/// eigendecomposition up to [`NORM_EIG_DIM_CAP`], from a deterministic
/// power iteration above it. Non-finite entries yield `+∞`.
pub fn sym_spectral_norm(m: &Mat) -> f64 {
    assert!(m.is_square());
    if !m.all_finite() {
        return f64::INFINITY;
    }
    if m.rows() <= NORM_EIG_DIM_CAP {
        if let Ok((values, _)) = jacobi_eigen(m, DEFAULT_JACOBI_SWEEPS) {
            return values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        }
    }
    power_iteration_norm(m)
}

fn power_iteration_norm(m: &Mat) -> f64 {
    let n = m.rows();
    let starts: [fn(usize) -> f64; 2] = [|_| 1.0, |i| if i % 2 == 0 { 1.0 } else { -1.0 }];
    let mut best = 0.0_f64;
    for start in starts {
        let mut v: Vec<f64> = (0..n).map(start).collect();
        let norm0 = vec_norm(&v);
        for x in v.iter_mut() {
            *x /= norm0;
        }
        let mut est = 0.0_f64;
        let mut stable = 0;
        for _ in 0..500 {
            let w = m.matvec(&v);
            let wn = vec_norm(&w);
            if wn == 0.0 {
                est = 0.0;
                break;
            }
            if (wn - est).abs() <= 1e-13 * est.max(1.0) {
                stable += 1;
                if stable >= 3 {
                    est = wn;
                    break;
                }
            } else {
                stable = 0;
            }
            est = wn;
            v = w;
            for x in v.iter_mut() {
                *x /= wn;
            }
        }
        best = best.max(est);
    }
    best
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Spectral-norm distance between two operators of equal dimension.
pub fn op_distance(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    assert_eq!(a.dim(), b.dim(), "op_distance requires equal dimensions");
    sym_spectral_norm(&a.mat().sub(b.mat()))
}

/// Spectral norm of a general (possibly non-symmetric) square matrix via
/// the Gram matrix.
pub fn operator_norm(m: &Mat) -> f64 {
    assert!(m.is_square());
    if !m.all_finite() {
        return f64::INFINITY;
    }
    sym_spectral_norm(&m.transpose().matmul(m)).sqrt()
}
