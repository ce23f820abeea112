//! Contraction semigroups: e^{tA} decays to the kernel projection with
//! rate given by the spectral gap, and the Yosida-style power limit
//! (I + t0 A)^n reaches the same projection.
//!
//! Run with: cargo run --example semigroup_limit

use phi::semigroup::KERNEL_TOL;
use phi::{
    eig_decompose, op_distance, semigroup_at, semigroup_limit, yosida_power_limit,
    HermitianOperator,
};

fn main() {
    // A contraction generator with a 1-dimensional kernel.
    let a = HermitianOperator::from_rows(&[
        vec![-1.0, 0.5, 0.0],
        vec![0.5, -1.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ])
    .expect("symmetric");
    let d = eig_decompose(&a, 1e-8).expect("eigensolver");
    println!("spectrum: {:?}", d.eigenvalues());

    let (p, gap) = semigroup_limit(&d, KERNEL_TOL).expect("contraction");
    println!("spectral gap: {gap}");
    println!(
        "kernel projection diagonal: {:?}",
        (0..p.dim()).map(|i| p.entry(i, i)).collect::<Vec<f64>>()
    );

    println!("\n   t    |e^(tA) - P|   e^(-gap t)");
    for t in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let tt = semigroup_at(&d, t).unwrap();
        println!(
            "{:>5}   {:<12.6e}  {:<12.6e}",
            t,
            op_distance(&tt, &p),
            (-gap * t).exp()
        );
    }

    // Semigroup law: T(1) T(1) = T(2).
    let t1 = semigroup_at(&d, 1.0).unwrap();
    let t2 = semigroup_at(&d, 2.0).unwrap();
    let law = phi::sym_spectral_norm(&t1.mat().matmul(t1.mat()).sub(t2.mat()));
    println!("\nsemigroup law |T(1)T(1) - T(2)|: {law:.3e}");

    // Yosida-style power limit.
    let (limit, converged_at) = yosida_power_limit(&d, 0.4, 500, 1e-8).expect("hypothesis holds");
    println!(
        "(I + 0.4 A)^n reached the kernel projection at n = {:?}; |limit - P| = {:.3e}",
        converged_at,
        op_distance(&limit, &p)
    );
}
