//! The flagship run: iterated squaring drives a [0,1]-spectrum operator to
//! the projection onto its eigenvalue-1 eigenspace.
//!
//! Run with: cargo run --example squaring_to_projection

use phi::{
    check_idempotent, eig_decompose, iterate_to_fixed_point, op_distance, HermitianOperator,
    Interval, IterationConfig, Mat, PhiTransform, SpectralMap,
};

fn main() {
    // Spectrum {1, 0.7, 0.3} rotated into a non-trivial orthonormal basis.
    let q = Mat::from_rows(&[
        vec![2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0],
        vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0],
        vec![2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0],
    ]);
    let m = q
        .matmul(&Mat::diag(&[1.0, 0.7, 0.3]))
        .matmul(&q.transpose());
    let mut sym = Mat::zeros(3, 3);
    for i in 0..3 {
        for j in i..3 {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            sym.set(i, j, v);
            sym.set(j, i, v);
        }
    }
    let a = HermitianOperator::new(sym, 1e-12).expect("symmetric");

    let transform = PhiTransform::scalar(SpectralMap::square()).unwrap();
    let cfg = IterationConfig::default();
    let result = iterate_to_fixed_point(&transform, &a, &cfg).expect("stabilizes");

    println!("stage  dim  residual      spectrum");
    for rec in &result.trace {
        let spectrum = rec
            .spectrum
            .as_ref()
            .map(|s| {
                s.iter()
                    .map(|v| format!("{v:+.6}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:>5}  {:>3}  {:<12.3e}  [{}]",
            rec.stage.to_string(),
            rec.operator.dim(),
            rec.residual,
            spectrum
        );
    }
    println!(
        "stabilized at stage {} with residual {:.3e}",
        result.stabilization_stage, result.final_residual
    );

    let (is_projection, defect) = check_idempotent(&result.a_infinity, 1e-8);
    println!("A_inf is a projection: {is_projection} (defect {defect:.3e})");

    // It is exactly the spectral projection of the source operator at 1.
    let e1 = eig_decompose(&a, 1e-8)
        .unwrap()
        .spectral_projection(Interval::new(0.9, 1.1));
    println!(
        "distance to E({{1}}) of the source operator: {:.3e}",
        op_distance(&result.a_infinity, &e1)
    );
}
