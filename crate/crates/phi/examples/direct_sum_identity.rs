//! The identity-adjoining expansion A -> A (+) I: a fixed point exists only
//! modulo trivial summands, while strict comparison grows the space until
//! the budget runs out.
//!
//! Run with: cargo run --example direct_sum_identity

use phi::engine::StallReason;
use phi::{
    canonical_form_modulo_trivial, check_fixed_point, iterate_to_fixed_point, EngineError,
    EquivalenceMode, HermitianOperator, IterationConfig, PhiTransform,
};

fn main() {
    let a = HermitianOperator::diag(&[0.5]);
    let transform = PhiTransform::direct_sum_identity();

    // Modulo trivial summands: one application settles it, and the first
    // adjoined eigenvalue-1 block belongs to the fixed point.
    let cfg = IterationConfig::default();
    let res = iterate_to_fixed_point(&transform, &a, &cfg).unwrap();
    println!(
        "modulo trivial summands: stabilized at stage {} on dimension {}",
        res.stabilization_stage,
        res.a_infinity.dim()
    );
    println!(
        "A_inf diagonal: {:?}",
        (0..res.a_infinity.dim())
            .map(|i| res.a_infinity.entry(i, i))
            .collect::<Vec<_>>()
    );
    println!(
        "fixed-point residual (modulo trivial): {:.3e}",
        check_fixed_point(
            &transform,
            &res.a_infinity,
            EquivalenceMode::ModuloTrivialSummands,
            cfg.epsilon
        )
    );

    // Canonical form strips adjoined identity blocks outside the protected
    // leading subspace.
    let padded = HermitianOperator::diag(&[0.5, 1.0, 1.0]);
    let stripped = canonical_form_modulo_trivial(&padded, 1, 1e-10);
    println!(
        "canonical form of diag(0.5, 1, 1) protecting dim 1: dim {}",
        stripped.dim()
    );

    // Strict mode: the dimension doubles every step until the space budget
    // is exceeded; the run reports the stall instead of hiding it.
    let strict = IterationConfig {
        mode: EquivalenceMode::Strict,
        space_budget: 64,
        ..IterationConfig::default()
    };
    match iterate_to_fixed_point(&transform, &a, &strict) {
        Err(EngineError::NotStabilized { reason, trace }) => {
            println!("strict mode: {reason}");
            if let StallReason::SpaceBudget { .. } = reason {
                let dims: Vec<usize> = trace.iter().map(|r| r.operator.dim()).collect();
                println!("dimension trajectory: {dims:?}");
            }
        }
        other => println!("unexpected outcome: {other:?}"),
    }
}
