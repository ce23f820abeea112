//! Shared builders for randomized suites: seeded, so every run sees the
//! same operators.
#![allow(dead_code)] // each test target uses its own subset

use phi::{HermitianOperator, Mat};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric matrix with entries in [-scale, scale].
pub fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> HermitianOperator {
    let mut m = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = rng.gen_range(-scale..=scale);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    HermitianOperator::new(m, 1e-12).expect("constructed symmetric")
}

/// Random orthogonal matrix as a product of Givens rotations.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> Mat {
    let mut q = Mat::identity(dim);
    if dim < 2 {
        return q;
    }
    for _ in 0..(3 * dim) {
        let i = rng.gen_range(0..dim);
        let mut j = rng.gen_range(0..dim - 1);
        if j >= i {
            j += 1;
        }
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = angle.sin_cos();
        // Rotate rows i and j of q.
        for k in 0..dim {
            let qi = q.get(i, k);
            let qj = q.get(j, k);
            q.set(i, k, c * qi - s * qj);
            q.set(j, k, s * qi + c * qj);
        }
    }
    q
}

/// Symmetric matrix with the given eigenvalues in a random orthonormal
/// basis: Q diag(eigenvalues) Qᵀ, symmetrized exactly.
pub fn diag_in_random_basis(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> HermitianOperator {
    let dim = eigenvalues.len();
    let q = random_orthogonal(rng, dim);
    let d = Mat::diag(eigenvalues);
    let m = q.matmul(&d).matmul(&q.transpose());
    let mut sym = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            sym.set(i, j, v);
            sym.set(j, i, v);
        }
    }
    HermitianOperator::new(sym, 1e-12).expect("symmetrized")
}

/// Random orthogonal projection of the given rank.
pub fn random_projection(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> HermitianOperator {
    let eigenvalues: Vec<f64> = (0..dim).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    diag_in_random_basis(rng, &eigenvalues)
}

/// Dense polynomial evaluation p(A) by Horner's rule.
pub fn matrix_horner(a: &HermitianOperator, coeffs: &[f64]) -> Mat {
    // coeffs[k] multiplies x^k.
    let n = a.dim();
    let mut acc = Mat::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = acc.matmul(a.mat());
        for i in 0..n {
            acc.set(i, i, acc.get(i, i) + c);
        }
    }
    acc
}

pub fn scalar_horner(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
