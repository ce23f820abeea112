//! Spectral theorem basics: decompose a symmetric operator, apply scalar
//! functions through the calculus, and recover spectral projections.
//!
//! Run with: cargo run --example spectral_decomposition

use phi::{eig_decompose, op_distance, HermitianOperator, Interval, SpectralMap};

fn main() {
    let a = HermitianOperator::from_rows(&[
        vec![0.6, 0.3, 0.0],
        vec![0.3, 0.2, 0.1],
        vec![0.0, 0.1, 0.9],
    ])
    .expect("symmetric");

    let d = eig_decompose(&a, 1e-8).expect("eigensolver");
    println!("eigenvalue clusters:");
    for c in d.clusters() {
        println!(
            "  lambda = {:+.12}  multiplicity {}",
            c.value,
            c.multiplicity()
        );
    }

    // A = sum lambda_j P_j
    let recon = d.reconstruct();
    println!("reconstruction residual: {:.3e}", op_distance(&recon, &a));

    // Functional calculus: f(A) = sum f(lambda_j) P_j
    let squared = d.apply_calculus(&SpectralMap::square()).unwrap();
    let dense = a.mat().matmul(a.mat());
    println!(
        "f(x)=x^2 vs dense product: {:.3e}",
        phi::sym_spectral_norm(&squared.mat().sub(&dense))
    );

    // Spectral projection onto an eigenvalue window.
    let top = d.spectral_projection(Interval::new(0.8, 1.2));
    let (is_projection, defect) = phi::check_idempotent(&top, 1e-10);
    println!(
        "E([0.8, 1.2]): projection = {is_projection} (defect {defect:.3e}), rank ~ {:.3}",
        (0..top.dim()).map(|i| top.entry(i, i)).sum::<f64>()
    );

    // The full-line projection is the identity.
    let full = d.spectral_projection(Interval::all_reals());
    println!(
        "E(R) vs identity: {:.3e}",
        op_distance(&full, &HermitianOperator::identity(a.dim()))
    );
}
