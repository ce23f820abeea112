//! Self-adjoint operators at desk scale: real symmetric matrices with an
//! explicit symmetry tolerance.

use crate::mat::Mat;
use thiserror::Error;

/// Default maximum allowed asymmetry `|a_ij - a_ji|`.
pub const DEFAULT_SYM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("operator dimension must be at least 1")]
    EmptyDimension,
    #[error("entry ({i},{j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error(
        "not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {asymmetry:e} exceeds tolerance {tol:e}"
    )]
    NonSymmetric {
        i: usize,
        j: usize,
        asymmetry: f64,
        tol: f64,
    },
}

/// A real symmetric matrix standing in for a self-adjoint operator on a
/// finite-dimensional Hilbert space. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: Mat,
    sym_tol: f64,
}

impl HermitianOperator {
    /// Validates squareness, finiteness and symmetry within `sym_tol`.
    pub fn new(mat: Mat, sym_tol: f64) -> Result<Self, OperatorError> {
        if !mat.is_square() {
            return Err(OperatorError::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if mat.rows() == 0 {
            return Err(OperatorError::EmptyDimension);
        }
        let n = mat.rows();
        for i in 0..n {
            for j in 0..n {
                if !mat.get(i, j).is_finite() {
                    return Err(OperatorError::NonFinite { i, j });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let asym = (mat.get(i, j) - mat.get(j, i)).abs();
                if asym > sym_tol {
                    return Err(OperatorError::NonSymmetric {
                        i,
                        j,
                        asymmetry: asym,
                        tol: sym_tol,
                    });
                }
            }
        }
        Ok(HermitianOperator { mat, sym_tol })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, OperatorError> {
        Self::new(Mat::from_rows(rows), DEFAULT_SYM_TOL)
    }

    pub fn diag(values: &[f64]) -> Self {
        HermitianOperator {
            mat: Mat::diag(values),
            sym_tol: DEFAULT_SYM_TOL,
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator {
            mat: Mat::identity(dim),
            sym_tol: DEFAULT_SYM_TOL,
        }
    }

    pub fn zero(dim: usize) -> Self {
        HermitianOperator {
            mat: Mat::zeros(dim, dim),
            sym_tol: DEFAULT_SYM_TOL,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn sym_tol(&self) -> f64 {
        self.sym_tol
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    /// `self ⊕ I_k`: the original block followed by a k-dimensional
    /// identity summand.
    pub fn direct_sum_identity(&self, k: usize) -> HermitianOperator {
        HermitianOperator {
            mat: self.mat.direct_sum(&Mat::identity(k)),
            sym_tol: self.sym_tol,
        }
    }

    /// Construction known to be symmetric (projections, calculus output);
    /// skips the entry scan.
    pub(crate) fn from_symmetric_mat(mat: Mat, sym_tol: f64) -> HermitianOperator {
        debug_assert!(mat.is_square());
        HermitianOperator { mat, sym_tol }
    }

    pub fn approx_eq(&self, other: &HermitianOperator, tol: f64) -> bool {
        self.mat.approx_eq(&other.mat, tol)
    }
}
