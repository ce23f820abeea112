//! Scenario-driven experiments without the CLI: parse a scenario, run it,
//! and emit report.json / trace.csv / spectra.csv.
//!
//! Run with: cargo run --example scenario_run

use phi::report::{emit_report, run_scenario};
use phi::Scenario;
use std::path::Path;

fn main() {
    let toml = r#"
operator = [[0.9, 0.05, 0.0], [0.05, 0.4, 0.0], [0.0, 0.0, 1.0]]
map = "square"
epsilon = 1e-8
equivalence_mode = "modulo_trivial"
analyses = ["spectral_mapping", "idempotence", "basins", "koopman"]
seed = 42
"#;

    let resolved = Scenario::from_toml_str(toml)
        .expect("well-formed TOML")
        .resolve(Path::new("."))
        .expect("valid scenario");
    let report = run_scenario(&resolved).expect("run succeeds");

    println!(
        "fixed point: {} at stage {:?} (residual {:?})",
        report.fixed_point.status,
        report.fixed_point.stage_display,
        report.fixed_point.final_residual
    );
    if let Some(basins) = &report.analyses.basins {
        for c in &basins.components {
            println!(
                "basin: attractor {:+.3} with dimension {}",
                c.attractor, c.dim
            );
        }
    }
    if let Some(sm) = &report.analyses.spectral_mapping {
        println!(
            "spectral mapping: pass = {} over {} stages",
            sm.overall_pass,
            sm.per_stage.len()
        );
    }

    let out = std::env::temp_dir().join("phi-scenario-example");
    let written = emit_report(&report, &out).expect("writable");
    println!("\nwrote:");
    for path in written {
        println!("  {}", path.display());
    }
    println!("(rerunning with the same seed reproduces report.json byte for byte)");
}
