//! The truncated Koopman shift: a strictly lower block-triangular operator
//! on sequence space that advances the iteration by one slot, prepending
//! zero.
//!
//! Run with: cargo run --example koopman_shift

use phi::{koopman_shift_truncated, HermitianOperator, PhiTransform, SpectralMap};

fn main() {
    let a = HermitianOperator::diag(&[1.0, 0.5]);
    let t = PhiTransform::scalar(SpectralMap::square()).unwrap();
    let k = koopman_shift_truncated(&t, &a, 4).expect("scalar transform");

    println!(
        "{} blocks of dimension {} (total {})",
        k.block_count(),
        k.block_dim(),
        k.dim()
    );
    println!(
        "strictly lower block shift: {}",
        k.is_strictly_lower_block_shift()
    );
    println!("nilpotency |T^N|: {:e} (exact zero)", k.nilpotency_defect());
    println!("norm estimate |T|: {:.6}", k.norm_estimate());

    // A vector in the stable subspace (the eigenvalue-1 eigenspace) is
    // fixed by every stage map, so the constant sequence maps to its
    // zero-prepended shift, bit for bit.
    let x0 = vec![1.0, 0.0];
    let constant: Vec<Vec<f64>> = (0..4).map(|_| x0.clone()).collect();
    let image = k.apply_blocks(&constant);
    println!("\nT (x0, x0, x0, x0) slot by slot:");
    for (i, slot) in image.iter().enumerate() {
        println!("  slot {i}: {slot:?}");
    }
    // Shifted, not fixed: the leading zero keeps it from being an
    // eigenvector of the truncated shift.
    println!("fixed by T: {}", image == constant);

    // A decaying component is advanced through successive stage maps.
    let y0 = vec![0.0, 1.0];
    let seq: Vec<Vec<f64>> = (0..4).map(|_| y0.clone()).collect();
    let image = k.apply_blocks(&seq);
    println!("\nT (y0, y0, y0, y0) with y0 in the decaying eigenspace:");
    for (i, slot) in image.iter().enumerate() {
        println!("  slot {i}: {slot:?}");
    }
}
