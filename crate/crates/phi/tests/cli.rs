//! End-to-end checks of the `phi` binary: subcommands, exit codes, and the
//! on-disk artifacts of a scenario run.

use std::path::Path;
use std::process::Command;

fn phi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phi"))
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn version_flag_works() {
    let out = phi().arg("--version").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("phi "), "got: {stdout}");
}

#[test]
fn run_emits_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("sq.toml");
    write(
        &scenario,
        r#"
operator = [[1.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.0]]
map = "square"
analyses = ["idempotence", "basins", "spectral_mapping"]
seed = 9
"#,
    );
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = phi()
            .args(["run"])
            .arg(&scenario)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("stabilized at stage"), "stdout: {stdout}");
        assert!(out_dir.join("report.json").exists());
        assert!(out_dir.join("trace.csv").exists());
        assert!(out_dir.join("spectra.csv").exists());
    }
    let a = std::fs::read(dir.path().join("a/report.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/report.json")).unwrap();
    assert_eq!(a, b, "report.json must be byte-identical across reruns");

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["fixed_point"]["status"], "stabilized");
    assert_eq!(report["seed"], 9);
    assert!(report["analyses"]["basins"]["components"].is_array());
    assert!(
        report.get("wall_time_ms").is_none(),
        "timing must stay out of the artifact"
    );

    let trace = std::fs::read_to_string(dir.path().join("a/trace.csv")).unwrap();
    assert!(trace.starts_with("stage,dim,residual,spectrum"));
}

#[test]
fn run_with_operator_file_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path().join("op.txt").as_path(),
        "# projection\n2\n1 0\n0 0\n",
    );
    let scenario = dir.path().join("proj.toml");
    write(
        &scenario,
        r#"
operator = "op.txt"
map = "square"
"#,
    );
    let out_dir = dir.path().join("out");
    let out = phi()
        .args(["run"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seed", "77"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 77);
    assert_eq!(report["fixed_point"]["stage_display"], "0");
}

#[test]
fn run_many_scenarios_with_jobs() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..3 {
        write(
            dir.path().join(format!("s{i}.toml")).as_path(),
            &format!("operator = [[0.{i}5]]\nmap = \"square\"\n"),
        );
    }
    let out_dir = dir.path().join("batch");
    let mut cmd = phi();
    cmd.arg("run");
    for i in 0..3 {
        cmd.arg(dir.path().join(format!("s{i}.toml")));
    }
    let out = cmd
        .arg("--out")
        .arg(&out_dir)
        .args(["--jobs", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    for i in 0..3 {
        assert!(out_dir.join(format!("s{i}")).join("report.json").exists());
    }
}

#[test]
fn bundled_scenarios_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let scenarios = root.join("scenarios");
    if !scenarios.exists() {
        panic!("bundled scenarios directory is missing");
    }
    let dir = tempfile::tempdir().unwrap();
    let out = phi()
        .arg("run")
        .arg(scenarios.join("squaring_to_projection.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let spectrum = report["fixed_point"]["a_infinity_spectrum"]
        .as_array()
        .unwrap();
    let top = spectrum.last().unwrap().as_f64().unwrap();
    assert!((top - 1.0).abs() <= 1e-8, "top eigenvalue {top}");
    assert_eq!(report["analyses"]["idempotence"]["is_projection"], true);
}

#[test]
fn invalid_scenario_fails_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.toml");
    write(&scenario, "operator = [[0.5]]\nmap = \"exp_scale:1\"\n");
    let out = phi().arg("run").arg(&scenario).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("idempotent-preservation"),
        "stderr: {stderr}"
    );
}

#[test]
fn decompose_prints_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("op.txt");
    write(&op, "3\n1 0 0\n0 1 0\n0 0 0.5\n");
    let out = phi().arg("decompose").arg(&op).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("clusters: 2"), "stdout: {stdout}");
    assert!(stdout.contains("multiplicity 2"), "stdout: {stdout}");
}

#[test]
fn decompose_rejects_asymmetric_file() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("op.txt");
    write(&op, "2\n0 1\n0.5 0\n");
    let out = phi().arg("decompose").arg(&op).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not symmetric"), "stderr: {stderr}");
}

#[test]
fn semigroup_subcommand_reports_limit() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("op.txt");
    write(&op, "3\n0 0 0\n0 -1 0\n0 0 -2\n");
    let out = phi()
        .arg("semigroup")
        .arg(&op)
        .args(["--t", "1.0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("spectral gap"), "stdout: {stdout}");
}

#[test]
fn koopman_subcommand_accepts_any_scalar_map() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("op.txt");
    write(&op, "1\n1\n");
    let out = phi()
        .arg("koopman")
        .arg(&op)
        .args(["--map", "affine:0.5,0", "--blocks", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("strictly lower block shift: true"),
        "stdout: {stdout}"
    );
    assert!(
        stdout.contains("nilpotency defect |T^N|: 0"),
        "stdout: {stdout}"
    );
}
