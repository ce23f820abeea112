//! Basin decomposition: split the space by the spectral fate of each
//! eigenvalue under a scalar map, then rebuild the fixed point from the
//! attractors.
//!
//! Run with: cargo run --example basin_decomposition

use phi::{
    basin_decomposition, eig_decompose, iterate_to_fixed_point, op_distance, HermitianOperator,
    IterationConfig, OrbitConfig, PhiTransform, SpectralMap,
};

fn main() {
    let a = HermitianOperator::diag(&[0.9, 0.3, 1.0, 0.65, 1.0]);
    let map = SpectralMap::square();

    let d = eig_decompose(&a, 1e-8).expect("eigensolver");
    let basins = basin_decomposition(&d, &map, &OrbitConfig::default()).expect("orbits");

    println!("source dimension: {}", basins.source_dim);
    for c in &basins.components {
        println!(
            "  attractor {:+.6}: basin dimension {}",
            c.attractor,
            c.dim()
        );
    }
    println!(
        "escaped/cycling/undecided dimension: {}",
        basins.escaped_dim
    );

    // The fixed point of the squaring run is the attractor-weighted sum of
    // the basin projections.
    let t = PhiTransform::scalar(map).unwrap();
    let res = iterate_to_fixed_point(&t, &a, &IterationConfig::default()).unwrap();
    let rebuilt = basins.reconstruction();
    println!(
        "|A_inf - sum xi_j P_j| = {:.3e}",
        op_distance(&res.a_infinity, &rebuilt)
    );

    // With an escaping eigenvalue the component is assigned to no basin.
    let b = HermitianOperator::diag(&[2.0, 0.4]);
    let db = eig_decompose(&b, 1e-8).unwrap();
    let escaped =
        basin_decomposition(&db, &SpectralMap::square(), &OrbitConfig::default()).unwrap();
    println!(
        "diag(2, 0.4) under squaring: components {:?}, escaped_dim {}",
        escaped
            .components
            .iter()
            .map(|c| (c.attractor, c.dim()))
            .collect::<Vec<_>>(),
        escaped.escaped_dim
    );
}
