//! Iterated spectral transformations of finite-dimensional self-adjoint
//! operators.
//!
//! The library decomposes real symmetric matrices through a cyclic-Jacobi
//! spectral theorem, applies scalar maps through the functional calculus,
//! and iterates operator transforms Φ — scalar spectral maps, the
//! identity-adjoining direct sum `A ↦ A ⊕ I`, and composites — through
//! ordinal-indexed stages (successor steps plus ω-limit bookkeeping) to the
//! fixed-point operator Φ^∞(A). On top of the iteration sit verification
//! suites (per-stage spectral mapping, idempotence of limits, basin
//! decomposition by spectral fate, unitary equivalence), contraction
//! semigroup limits `e^{tA} → P`, Yosida-style power limits, a truncated
//! Koopman shift over the Φ-trace, and the grid right-shift semigroup.
//!
//! The shortest possible tour:
//!
//! ```
//! use phi::{iterate_to_fixed_point, HermitianOperator, IterationConfig,
//!           PhiTransform, SpectralMap};
//!
//! // Spectrum {1, 0.5, 0}: squaring drives 0.5 to 0 and keeps the rest.
//! let a = HermitianOperator::diag(&[1.0, 0.5, 0.0]);
//! let square = PhiTransform::scalar(SpectralMap::square()).unwrap();
//! let run = iterate_to_fixed_point(&square, &a, &IterationConfig::default()).unwrap();
//!
//! let (is_projection, _) = phi::check_idempotent(&run.a_infinity, 1e-8);
//! assert!(is_projection);
//! assert!(run.a_infinity.approx_eq(&HermitianOperator::diag(&[1.0, 0.0, 0.0]), 1e-6));
//! ```
//!
//! The runnable examples cover each capability in depth:
//!
//! ```bash
//! cargo run --example squaring_to_projection
//! cargo run --example basin_decomposition
//! cargo run --example semigroup_limit
//! ```
//!
//! A thin `phi` binary drives scenario files; see the README for the
//! scenario and operator file formats.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod maps;
pub mod mat;
pub mod operator;
pub mod opfile;
pub mod report;
pub mod scenario;
pub mod semigroup;
pub mod spectral;
pub mod transform;

pub use analysis::{
    basin_decomposition, check_idempotent, compare_up_to_unitary, verify_spectral_mapping,
    BasinComponent, BasinDecomposition, OrbitConfig, SpectralMappingReport,
};
pub use engine::{
    canonical_form_modulo_trivial, check_fixed_point, iterate_to_fixed_point, EngineError,
    EquivalenceMode, FixedPointResult, IterationConfig, StageRecord, StallReason,
};
pub use maps::{
    classify_attractor, fixed_points_on, scalar_limit, scalar_limit_traced, Interval, OrbitKind,
    OrbitOutcome, SpectralMap, Stability,
};
pub use mat::Mat;
pub use operator::HermitianOperator;
pub use opfile::{parse_operator_file, write_operator_file};
pub use report::{emit_report, parse_report, run_scenario, RunReport};
pub use scenario::{Analysis, ResolvedScenario, Scenario};
pub use semigroup::{
    koopman_shift_truncated, read_grid_csv, semigroup_at, semigroup_limit, shift_evolution,
    write_grid_csv, yosida_power_limit, GridFunction, KoopmanBlockOperator,
};
pub use spectral::{
    apply_calculus, eig_decompose, op_distance, spectral_projection, sym_spectral_norm,
    SpectralDecomposition,
};
pub use transform::{Embedding, PhiTransform, TransformKind};

/// Ordinal stage token ω·k + n.
pub use engine::Stage;
