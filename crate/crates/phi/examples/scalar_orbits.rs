//! Scalar spectral dynamics: orbit iteration, fixed points, attractor
//! classification, escape and cycling.
//!
//! Run with: cargo run --example scalar_orbits

use phi::{classify_attractor, fixed_points_on, scalar_limit, OrbitKind, SpectralMap};

fn main() {
    let square = SpectralMap::square();

    for lambda in [0.5, 1.0, 1.5, -0.8] {
        let out = scalar_limit(&square, lambda, 1e-10, 10_000).unwrap();
        match out.kind {
            OrbitKind::Converged(mu) => {
                println!(
                    "x^2 from {lambda:>4}: converged to {mu:.3e} in {} steps",
                    out.steps_used
                )
            }
            OrbitKind::Escaped { at_step } => {
                println!("x^2 from {lambda:>4}: escaped at step {at_step}")
            }
            other => println!("x^2 from {lambda:>4}: {other:?}"),
        }
    }

    // A sign flip cycles with period 2.
    let neg = SpectralMap::affine(-1.0, 0.0);
    let out = scalar_limit(&neg, 0.25, 1e-10, 100).unwrap();
    println!("-x from 0.25: {:?}", out.kind);

    // Fixed points of x^3 on a sample spectrum.
    let cube = SpectralMap::power(3);
    let spectrum = [-1.0, -0.5, 0.0, 0.5, 1.0];
    println!(
        "fixed points of x^3 on {:?}: {:?}",
        spectrum,
        fixed_points_on(&cube, &spectrum, 1e-10)
    );

    // Stability of the square map's fixed points.
    for xi in [0.0, 1.0] {
        let class = classify_attractor(&square, xi, 1e-4).unwrap();
        println!("x^2 at xi = {xi}: {class:?}");
    }
}
