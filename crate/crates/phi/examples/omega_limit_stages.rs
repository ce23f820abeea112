//! Ordinal bookkeeping beyond the finite stages: a dimension-growing
//! transform whose aligned successor differences go Cauchy triggers an
//! omega-limit stage record, after which successor steps resume from the
//! limit operator.
//!
//! Run with: cargo run --example omega_limit_stages

use phi::{
    iterate_to_fixed_point, EngineError, EquivalenceMode, HermitianOperator, Interval,
    IterationConfig, PhiTransform, SpectralMap,
};

fn main() {
    // g(0) = g(1) = 0 and |g| shrinks everything else, so each adjoined
    // identity block dies immediately while the rest decays geometrically:
    // the strict residual stays incomparable (the dimension grows every
    // step) but the aligned differences vanish.
    let taper = SpectralMap::new("taper", Interval::all_reals(), 1e6, |x| {
        if x.abs() >= 0.5 {
            0.0
        } else {
            0.25 * x
        }
    });
    let transform = PhiTransform::composite(vec![
        PhiTransform::direct_sum_identity(),
        PhiTransform::scalar_unchecked(taper),
    ])
    .unwrap();

    let a = HermitianOperator::diag(&[0.4]);
    let cfg = IterationConfig {
        epsilon: 1e-2,
        mode: EquivalenceMode::Strict,
        ..IterationConfig::default()
    };

    match iterate_to_fixed_point(&transform, &a, &cfg) {
        Err(EngineError::NotStabilized { reason, trace }) => {
            println!("stage   dim   aligned residual");
            for rec in &trace {
                let marker = if rec.stage.is_omega_limit() {
                    "  <- omega limit"
                } else {
                    ""
                };
                println!(
                    "{:>5}  {:>4}   {:<12.3e}{marker}",
                    rec.stage.to_string(),
                    rec.operator.dim(),
                    rec.residual
                );
            }
            println!("\nrun ended without stabilizing: {reason}");
            println!(
                "omega limits taken: {}",
                trace
                    .iter()
                    .map(|r| r.stage.omega_limits)
                    .max()
                    .unwrap_or(0)
            );
        }
        Ok(res) => println!("unexpectedly stabilized at {}", res.stabilization_stage),
        Err(e) => println!("error: {e}"),
    }
}
