//! Acceptance suite: each criterion below drives the library at its stated
//! tolerance and prints one pass/fail line.

mod common;

use common::*;
use phi::engine::{EngineError, StageRecord, StallReason};
use phi::report::{emit_report, report_json, run_scenario};
use phi::scenario::Scenario;
use phi::semigroup::KERNEL_TOL;
use phi::{
    basin_decomposition, check_idempotent, eig_decompose, iterate_to_fixed_point,
    koopman_shift_truncated, op_distance, semigroup_at, semigroup_limit, verify_spectral_mapping,
    yosida_power_limit, EquivalenceMode, FixedPointResult, HermitianOperator, Interval,
    IterationConfig, OrbitConfig, PhiTransform, SpectralMap, Stage,
};
use rand::Rng;
use std::time::Instant;

fn criterion(n: u32, name: &str, failures: Vec<String>) {
    let ok = failures.is_empty();
    println!(
        "acceptance criterion {n} ({name}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} ({name}):\n{}", failures.join("\n"));
}

/// 50 operators with spectrum in [0,1] and an eigenvalue pinned at 1, in a
/// random orthonormal basis.
fn squaring_instances() -> Vec<HermitianOperator> {
    let mut rng = rng(0x5151);
    (0..50)
        .map(|_| {
            let dim = rng.gen_range(2..=8usize);
            let mut eigenvalues = vec![1.0];
            for _ in 1..dim {
                eigenvalues.push(rng.gen_range(0.0..0.95));
            }
            diag_in_random_basis(&mut rng, &eigenvalues)
        })
        .collect()
}

#[test]
fn criterion_01_squaring_to_projection() {
    let mut failures = Vec::new();
    let square = PhiTransform::scalar(SpectralMap::square()).unwrap();
    let cfg = IterationConfig::default();
    let instances = squaring_instances();
    let started = Instant::now();
    for (i, a) in instances.iter().enumerate() {
        let res = match iterate_to_fixed_point(&square, a, &cfg) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("instance {i}: engine failed: {e}"));
                continue;
            }
        };
        if !(res.stabilization_stage.omega_limits == 0 && res.stabilization_stage.step <= 60) {
            failures.push(format!(
                "instance {i}: stabilized at {} (> 60 stages)",
                res.stabilization_stage
            ));
        }
        let (_, defect) = check_idempotent(&res.a_infinity, 1e-8);
        if defect > 1e-8 {
            failures.push(format!("instance {i}: idempotence defect {defect:e}"));
        }
        let d = eig_decompose(a, 1e-8).unwrap();
        let eig1 = d.spectral_projection(Interval::new(0.97, 1.03));
        let dist = op_distance(&res.a_infinity, &eig1);
        if dist > 1e-6 {
            failures.push(format!("instance {i}: |A_inf - E({{1}})| = {dist:e}"));
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() >= 5.0 {
        failures.push(format!("runtime {:.2}s exceeds 5s", elapsed.as_secs_f64()));
    }
    criterion(1, "squaring to projection", failures);
}

fn mapping_suite_maps() -> Vec<SpectralMap> {
    vec![
        SpectralMap::square(),
        SpectralMap::power(3),
        SpectralMap::affine(0.5, 0.0),
    ]
}

/// Runs for criteria 2 and 3: 100 random (A, f) pairs at ε = 1e-9, with
/// spectra drawn in [-1, 1] so every orbit stays bounded.
fn mapping_suite() -> Vec<(SpectralMap, Vec<StageRecord>, Option<FixedPointResult>)> {
    let maps = mapping_suite_maps();
    let mut rng = rng(0x5252);
    let cfg = IterationConfig {
        epsilon: 1e-9,
        ..IterationConfig::default()
    };
    (0..100)
        .map(|i| {
            let dim = rng.gen_range(2..=6usize);
            let eigenvalues: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let a = diag_in_random_basis(&mut rng, &eigenvalues);
            let map = maps[i % maps.len()].clone();
            let t = PhiTransform::scalar_unchecked(map.clone());
            match iterate_to_fixed_point(&t, &a, &cfg) {
                Ok(res) => {
                    let trace = res.trace.clone();
                    (map, trace, Some(res))
                }
                Err(EngineError::NotStabilized {
                    reason: StallReason::Escaped { .. },
                    trace,
                }) => (map, trace, None),
                Err(e) => panic!("unexpected engine failure: {e}"),
            }
        })
        .collect()
}

#[test]
fn criterion_02_spectral_mapping_per_stage() {
    let mut failures = Vec::new();
    for (i, (map, trace, _)) in mapping_suite().iter().enumerate() {
        match verify_spectral_mapping(trace, map, 1e-6) {
            Ok(report) => {
                if !report.overall_pass {
                    let worst = report
                        .per_stage
                        .iter()
                        .max_by(|a, b| a.max_deviation.total_cmp(&b.max_deviation))
                        .unwrap();
                    failures.push(format!(
                        "pair {i} ({}): stage {} deviates {:e} (allowed {:e})",
                        map.name(),
                        worst.stage,
                        worst.max_deviation,
                        worst.allowed
                    ));
                }
            }
            Err(e) => failures.push(format!("pair {i} ({}): {e}", map.name())),
        }
    }
    criterion(2, "spectral mapping per stage", failures);
}

#[test]
fn criterion_03_limit_spectrum_containment() {
    let mut failures = Vec::new();
    let mut completed = 0usize;
    for (i, (map, _, result)) in mapping_suite().iter().enumerate() {
        let Some(res) = result else { continue };
        completed += 1;
        let fixed_points: Vec<f64> = match map.name() {
            "square" => vec![0.0, 1.0],
            "power:3" => vec![-1.0, 0.0, 1.0],
            _ => vec![0.0], // affine:0.5,0
        };
        let spectrum = eig_decompose(&res.a_infinity, 0.0)
            .unwrap()
            .raw_eigenvalues();
        for lam in spectrum {
            let dist = fixed_points
                .iter()
                .map(|xi| (lam - xi).abs())
                .fold(f64::INFINITY, f64::min);
            if dist > 1e-8 {
                failures.push(format!(
                    "pair {i} ({}): eigenvalue {lam:e} is {dist:e} from the fixed-point set",
                    map.name()
                ));
            }
        }
    }
    if completed == 0 {
        failures.push("no completed runs in the suite".to_string());
    }
    criterion(3, "limit spectrum containment", failures);
}

#[test]
fn criterion_04_basin_reconstruction() {
    let mut failures = Vec::new();
    let square_map = SpectralMap::square();
    let square = PhiTransform::scalar(square_map.clone()).unwrap();
    let cfg = IterationConfig::default();
    for (i, a) in squaring_instances().iter().enumerate() {
        let res = iterate_to_fixed_point(&square, a, &cfg).expect("criterion 1 regime");
        let d = eig_decompose(a, 1e-8).unwrap();
        let basins = basin_decomposition(&d, &square_map, &OrbitConfig::default()).unwrap();
        let covered: usize = basins.component_dims().iter().sum();
        if covered + basins.escaped_dim != a.dim() {
            failures.push(format!("instance {i}: basin dims do not cover the space"));
        }
        if basins.escaped_dim != 0 {
            failures.push(format!(
                "instance {i}: unexpected escaped_dim {}",
                basins.escaped_dim
            ));
        }
        let rebuilt = basins.reconstruction();
        let dist = op_distance(&res.a_infinity, &rebuilt);
        if dist > 1e-8 {
            failures.push(format!("instance {i}: |A_inf - sum xi_j P_j| = {dist:e}"));
        }
    }
    criterion(4, "basin reconstruction", failures);
}

#[test]
fn criterion_05_monotonicity_on_projections() {
    let mut failures = Vec::new();
    let transforms = vec![
        PhiTransform::scalar(SpectralMap::square()).unwrap(),
        PhiTransform::scalar(SpectralMap::power(3)).unwrap(),
        PhiTransform::scalar(SpectralMap::power(4)).unwrap(),
        PhiTransform::scalar(SpectralMap::power(5)).unwrap(),
    ];
    let mut rng = rng(0x5555);
    let cfg = IterationConfig::default();
    for i in 0..20 {
        let dim = rng.gen_range(2..=8usize);
        let rank = rng.gen_range(1..dim);
        let p = random_projection(&mut rng, dim, rank);
        for t in &transforms {
            match iterate_to_fixed_point(t, &p, &cfg) {
                Ok(res) => {
                    if res.stabilization_stage != Stage::finite(0) {
                        failures.push(format!(
                            "projection {i} under {}: stage {}",
                            t.label(),
                            res.stabilization_stage
                        ));
                    }
                    if res.final_residual > 1e-10 {
                        failures.push(format!(
                            "projection {i} under {}: residual {:e}",
                            t.label(),
                            res.final_residual
                        ));
                    }
                }
                Err(e) => failures.push(format!("projection {i} under {}: {e}", t.label())),
            }
        }
    }
    criterion(5, "monotonicity axiom on projections", failures);
}

#[test]
fn criterion_06_direct_sum_modulo_trivial() {
    let mut failures = Vec::new();
    let t = PhiTransform::direct_sum_identity();
    let mut rng = rng(0x5656);
    let mut instances = vec![
        HermitianOperator::diag(&[0.5]),
        HermitianOperator::diag(&[1.0]),
        HermitianOperator::identity(2),
    ];
    for _ in 0..3 {
        let dim = rng.gen_range(1..=3usize);
        instances.push(random_symmetric(&mut rng, dim, 1.0));
    }
    let cfg = IterationConfig::default();
    for (i, a) in instances.iter().enumerate() {
        match iterate_to_fixed_point(&t, a, &cfg) {
            Ok(res) => {
                if res.stabilization_stage != Stage::finite(1) {
                    failures.push(format!(
                        "instance {i}: modulo-trivial stabilized at {}",
                        res.stabilization_stage
                    ));
                }
                if res.a_infinity.dim() != 2 * a.dim() {
                    failures.push(format!(
                        "instance {i}: fixed point should keep the adjoined block"
                    ));
                }
            }
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    // Strict mode at the default space budget: growth forever, reported.
    let strict = IterationConfig {
        mode: EquivalenceMode::Strict,
        ..IterationConfig::default()
    };
    for (i, a) in [
        HermitianOperator::diag(&[0.5]),
        random_symmetric(&mut rng, 2, 1.0),
    ]
    .iter()
    .enumerate()
    {
        match iterate_to_fixed_point(&t, a, &strict) {
            Err(EngineError::NotStabilized {
                reason: StallReason::SpaceBudget { attempted, budget },
                ..
            }) => {
                if budget != 4096 || attempted <= 4096 {
                    failures.push(format!(
                        "strict instance {i}: attempted {attempted}, budget {budget}"
                    ));
                }
            }
            other => failures.push(format!(
                "strict instance {i}: expected space-budget stall, got {other:?}"
            )),
        }
    }
    criterion(
        6,
        "direct-sum fixed point modulo trivial summands",
        failures,
    );
}

#[test]
fn criterion_07_semigroup_and_yosida_limits() {
    let mut failures = Vec::new();
    let mut rng = rng(0x5757);
    for i in 0..20 {
        let dim = rng.gen_range(2..=6usize);
        let kernel_dim = rng.gen_range(1..dim);
        let mut eigenvalues = vec![0.0; kernel_dim];
        for _ in kernel_dim..dim {
            eigenvalues.push(rng.gen_range(-2.0..=-0.1));
        }
        let a = diag_in_random_basis(&mut rng, &eigenvalues);
        let d = eig_decompose(&a, 1e-8).unwrap();
        let (p, gap) = match semigroup_limit(&d, KERNEL_TOL) {
            Ok(x) => x,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        if gap <= 0.0 {
            failures.push(format!("instance {i}: nonpositive gap {gap}"));
            continue;
        }
        let t = 10.0 / gap;
        let tt = semigroup_at(&d, t).unwrap();
        let dist = op_distance(&tt, &p);
        let bound = (-10.0_f64).exp() + 1e-10;
        if dist > bound {
            failures.push(format!(
                "instance {i}: |e^(10/gap A) - P| = {dist:e} > {bound:e}"
            ));
        }
        // Yosida hypothesis holds by construction (t0 = 0.4, spectrum >= -2).
        match yosida_power_limit(&d, 0.4, 2000, 1e-8) {
            Ok((limit, converged_at)) => {
                if converged_at.is_none() {
                    failures.push(format!("instance {i}: yosida powers did not converge"));
                }
                let agree = op_distance(&limit, &p);
                if agree > 1e-8 {
                    failures.push(format!(
                        "instance {i}: yosida limit differs from kernel projection by {agree:e}"
                    ));
                }
            }
            Err(e) => failures.push(format!("instance {i}: yosida: {e}")),
        }
    }
    criterion(7, "semigroup limit and Yosida agreement", failures);
}

#[test]
fn criterion_08_functional_calculus_vs_horner() {
    let mut failures = Vec::new();
    let mut rng = rng(0x5858);
    for i in 0..100 {
        let dim = rng.gen_range(2..=6usize);
        let a = random_symmetric(&mut rng, dim, 1.0);
        let degree = rng.gen_range(0..=4usize);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let d = eig_decompose(&a, 0.0).unwrap();
        let via_calculus = d.apply_fn("poly", |x| scalar_horner(x, &coeffs)).unwrap();
        let via_horner = matrix_horner(&a, &coeffs);
        let dist = phi::sym_spectral_norm(&via_calculus.mat().sub(&via_horner));
        if dist > 1e-8 {
            failures.push(format!("pair {i} (deg {degree}): deviation {dist:e}"));
        }
    }
    criterion(8, "functional calculus vs Horner", failures);
}

#[test]
fn criterion_09_koopman_structure() {
    let mut failures = Vec::new();
    // Frozen bit-for-bit instance: diagonal stage maps fix e1 exactly.
    let t = PhiTransform::scalar(SpectralMap::square()).unwrap();
    let a = HermitianOperator::diag(&[1.0, 0.5]);
    let k = koopman_shift_truncated(&t, &a, 5).unwrap();
    if !k.is_strictly_lower_block_shift() {
        failures.push("frozen instance: not strictly lower block triangular".to_string());
    }
    if k.nilpotency_defect() != 0.0 {
        failures.push(format!(
            "frozen instance: T^N defect {:e} (must be exactly 0)",
            k.nilpotency_defect()
        ));
    }
    let x0 = vec![1.0, 0.0];
    let constant: Vec<Vec<f64>> = (0..5).map(|_| x0.clone()).collect();
    let image = k.apply_blocks(&constant);
    let mut expected = vec![vec![0.0, 0.0]];
    expected.extend(vec![x0.clone(); 4]);
    if image != expected {
        failures.push(format!(
            "frozen instance: image {image:?} != zero-prepended shift"
        ));
    }
    if image == constant {
        failures.push("constant sequence must not be fixed by the shift".to_string());
    }
    // Random structural instances.
    let mut rng = rng(0x5959);
    for i in 0..5 {
        let a = random_symmetric(&mut rng, 3, 0.5);
        let t = PhiTransform::scalar(SpectralMap::power(3)).unwrap();
        let k = koopman_shift_truncated(&t, &a, 4).unwrap();
        if !k.is_strictly_lower_block_shift() {
            failures.push(format!("random instance {i}: block structure broken"));
        }
        if k.nilpotency_defect() != 0.0 {
            failures.push(format!("random instance {i}: not nilpotent"));
        }
    }
    criterion(9, "Koopman truncated shift structure", failures);
}

#[test]
fn criterion_10_report_determinism() {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = dir.path().join("det.toml");
    std::fs::write(
        &scenario_path,
        r#"
operator = [[0.9, 0.05, 0.0], [0.05, 0.4, 0.0], [0.0, 0.0, 1.0]]
map = "square"
analyses = ["spectral_mapping", "idempotence", "basins", "koopman"]
seed = 12345
"#,
    )
    .unwrap();

    let mut emitted = Vec::new();
    for run in 0..2 {
        let rs = Scenario::load(&scenario_path).unwrap();
        let report = run_scenario(&rs).unwrap();
        let out = dir.path().join(format!("out{run}"));
        emit_report(&report, &out).unwrap();
        emitted.push(std::fs::read(out.join("report.json")).unwrap());
        // Also check the serializer directly.
        let _ = report_json(&report).unwrap();
    }
    if emitted[0] != emitted[1] {
        failures.push("report.json differs between reruns of the same scenario".to_string());
    }
    if emitted[0].is_empty() {
        failures.push("empty report.json".to_string());
    }
    criterion(10, "report determinism", failures);
}
