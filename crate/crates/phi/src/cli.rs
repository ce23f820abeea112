//! The `phi` command-line front end: scenario runs, one-off decompositions,
//! semigroup evaluation, and Koopman shift assembly. Thin by design —
//! everything it does is a library call.

use crate::maps::SpectralMap;
use crate::opfile::parse_operator_file;
use crate::report::{emit_report, run_scenario, ReportError};
use crate::scenario::{Scenario, ScenarioError};
use crate::semigroup::{koopman_shift_truncated, semigroup_at, semigroup_limit, KERNEL_TOL};
use crate::spectral::{eig_decompose, op_distance, DEFAULT_CLUSTER_TOL};
use crate::transform::PhiTransform;
use clap::{Parser, Subcommand};
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario {path}: {source}")]
    Scenario {
        path: String,
        #[source]
        source: ScenarioError,
    },
    #[error("scenario {path}: {source}")]
    Report {
        path: String,
        #[source]
        source: ReportError,
    },
    #[error(transparent)]
    OpFile(#[from] crate::opfile::OpFileError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error(transparent)]
    Semigroup(#[from] crate::semigroup::SemigroupError),
    #[error(transparent)]
    Map(#[from] crate::maps::MapError),
    #[error("{failed} of {total} scenario runs failed")]
    RunFailures { failed: usize, total: usize },
}

#[derive(Parser, Debug)]
#[command(
    name = "phi",
    version,
    about = "Iterate spectral transforms on symmetric operators to their fixed points"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run scenario files and emit report.json / trace.csv / spectra.csv.
    Run {
        /// Scenario files (TOML), one run each.
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Output directory (per-scenario subdirectories when several
        /// scenarios are given).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run independent scenarios on this many threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Decompose an operator file and print its clustered spectrum.
    Decompose {
        operator: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Evaluate e^{tA} for an operator file and report the kernel limit.
    Semigroup {
        operator: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Assemble the truncated Koopman shift for an operator and a map.
    Koopman {
        operator: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 4)]
        blocks: usize,
    },
}

pub fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    dispatch(cli)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenarios,
            out,
            seed,
            jobs,
        } => cmd_run(&scenarios, out.as_deref(), seed, jobs.max(1)),
        Command::Decompose {
            operator,
            cluster_tol,
        } => cmd_decompose(&operator, cluster_tol),
        Command::Semigroup { operator, t } => cmd_semigroup(&operator, t),
        Command::Koopman {
            operator,
            map,
            blocks,
        } => cmd_koopman(&operator, &map, blocks),
    }
}

fn out_dir_for(
    path: &Path,
    cli_out: Option<&Path>,
    scenario_out: Option<&Path>,
    multi: bool,
) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    match (cli_out, scenario_out) {
        (Some(out), _) if multi => out.join(stem),
        (Some(out), _) => out.to_path_buf(),
        (None, Some(out)) => out.to_path_buf(),
        (None, None) => PathBuf::from("phi-out").join(stem),
    }
}

fn run_one(
    path: &Path,
    cli_out: Option<&Path>,
    seed: Option<u64>,
    multi: bool,
) -> Result<String, CliError> {
    let wrap_s = |source: ScenarioError| CliError::Scenario {
        path: path.display().to_string(),
        source,
    };
    let wrap_r = |source: ReportError| CliError::Report {
        path: path.display().to_string(),
        source,
    };
    let mut rs = Scenario::load(path).map_err(wrap_s)?;
    if let Some(seed) = seed {
        rs.seed = seed;
    }
    let report = run_scenario(&rs).map_err(wrap_r)?;
    let dir = out_dir_for(path, cli_out, rs.output.as_deref(), multi);
    emit_report(&report, &dir).map_err(wrap_r)?;
    let status = match report.fixed_point.stage_display.as_deref() {
        Some(stage) => format!(
            "stabilized at stage {stage} (residual {:.3e})",
            report.fixed_point.final_residual.unwrap_or(f64::NAN)
        ),
        None => format!(
            "not stabilized ({})",
            report
                .fixed_point
                .failure_reason
                .as_deref()
                .unwrap_or("unknown")
        ),
    };
    Ok(format!(
        "{}: {status}; wrote {} [{:.1} ms]",
        path.display(),
        dir.display(),
        report.wall_time_ms
    ))
}

fn cmd_run(
    scenarios: &[PathBuf],
    out: Option<&Path>,
    seed: Option<u64>,
    jobs: usize,
) -> Result<(), CliError> {
    let multi = scenarios.len() > 1;
    let total = scenarios.len();
    let mut results: Vec<Option<Result<String, CliError>>> = (0..total).map(|_| None).collect();

    if jobs <= 1 || total <= 1 {
        for (i, path) in scenarios.iter().enumerate() {
            results[i] = Some(run_one(path, out, seed, multi));
        }
    } else {
        let queue: Mutex<VecDeque<usize>> = Mutex::new((0..total).collect());
        let slots: Vec<Mutex<Option<Result<String, CliError>>>> =
            (0..total).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(total) {
                scope.spawn(|| loop {
                    let idx = match queue.lock().unwrap().pop_front() {
                        Some(i) => i,
                        None => break,
                    };
                    let res = run_one(&scenarios[idx], out, seed, multi);
                    *slots[idx].lock().unwrap() = Some(res);
                });
            }
        });
        for (i, slot) in slots.into_iter().enumerate() {
            results[i] = slot.into_inner().unwrap();
        }
    }

    let mut failed = 0;
    for res in results.into_iter().flatten() {
        match res {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        return Err(CliError::RunFailures { failed, total });
    }
    Ok(())
}

fn cmd_decompose(operator: &Path, cluster_tol: f64) -> Result<(), CliError> {
    let op = parse_operator_file(operator)?;
    let d = eig_decompose(&op, cluster_tol)?;
    println!("operator: {} (dim {})", operator.display(), op.dim());
    println!(
        "clusters: {} (cluster_tol {cluster_tol:e})",
        d.clusters().len()
    );
    for (i, c) in d.clusters().iter().enumerate() {
        println!(
            "  [{i}] eigenvalue {:+.12e}  multiplicity {}",
            c.value,
            c.multiplicity()
        );
    }
    let recon = d.reconstruct();
    println!("reconstruction residual: {:.3e}", op_distance(&recon, &op));
    Ok(())
}

fn cmd_semigroup(operator: &Path, t: f64) -> Result<(), CliError> {
    let op = parse_operator_file(operator)?;
    let d = eig_decompose(&op, DEFAULT_CLUSTER_TOL)?;
    let tt = semigroup_at(&d, t)?;
    println!("e^(t A) at t = {t}:");
    print_matrix(tt.mat());
    match semigroup_limit(&d, KERNEL_TOL) {
        Ok((p, gap)) => {
            let dist = op_distance(&tt, &p);
            println!("contraction generator: kernel projection P, spectral gap {gap:e}");
            println!(
                "distance to P: {dist:.6e} (decay bound e^(-gap t) = {:.6e})",
                (-gap * t).exp()
            );
        }
        Err(e) => println!("no kernel limit: {e}"),
    }
    Ok(())
}

fn cmd_koopman(operator: &Path, map: &str, blocks: usize) -> Result<(), CliError> {
    let op = parse_operator_file(operator)?;
    let map = SpectralMap::parse(map)?;
    // Shift assembly is purely mechanical; the monotonicity gate is an
    // engine concern, so any scalar map is admitted here.
    let t = PhiTransform::scalar_unchecked(map);
    let k = koopman_shift_truncated(&t, &op, blocks)?;
    println!(
        "truncated Koopman shift: {} blocks of dimension {} (total {})",
        k.block_count(),
        k.block_dim(),
        k.dim()
    );
    println!(
        "strictly lower block shift: {}",
        k.is_strictly_lower_block_shift()
    );
    println!("nilpotency defect |T^N|: {:e}", k.nilpotency_defect());
    println!("norm estimate: {:.6e}", k.norm_estimate());
    if k.dim() <= 12 {
        print_matrix(k.matrix());
    }
    Ok(())
}

fn print_matrix(m: &crate::mat::Mat) {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| format!("{:>14.6e}", m.get(i, j)))
            .collect();
        println!("  [{}]", row.join(", "));
    }
}
