//! Experiment harness for decentralized composite optimization runs.
//!
//! Subcommands:
//! - `run`: one configured solve; writes `metrics.csv` and `summary.json`.
//! - `topology`: build and validate the mixing matrix; print the report
//!   as JSON (exit 0 only if every clause passes).
//! - `compare`: several solvers on one shared problem; one CSV per
//!   solver plus a ranking summary.
//!
//! Exit codes: 0 success, 1 failed topology validation, 2 configuration
//! error, 3 numerical failure.

mod config;
mod output;
mod runner;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use odapg::consensus::{default_k, MixRegime};
use odapg::topology::{validate_gossip, ValidationReport};

use config::{
    env_seed_override, load_json, validate_common, CliError, CompareConfig, RunConfig,
    TopologySpec,
};
use output::{
    rank, reached_at, write_csv, write_json, CompareEntry, CompareSummary, ReferenceSummary,
    ResultSummary, RunSummary,
};
use runner::{build_problem, build_schedule, build_topology, compute_reference, execute};

#[derive(Parser)]
#[command(name = "odapg", about = "Decentralized composite optimization harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate the configured topology and print spectral quantities.
    Topology {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every solver in the config on the shared problem and rank them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out.as_deref()),
        Command::Topology { config, out } => cmd_topology(&config, out.as_deref()),
        Command::Compare { config, out } => cmd_compare(&config, out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn config_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve_out_dir(
    flag: Option<&Path>,
    config_out: Option<&Path>,
    required: bool,
) -> Result<Option<PathBuf>, CliError> {
    let dir = flag.map(Path::to_path_buf).or_else(|| config_out.map(Path::to_path_buf));
    match (dir, required) {
        (Some(dir), _) => {
            std::fs::create_dir_all(&dir).map_err(|e| {
                CliError::Config(format!("cannot create output dir {}: {e}", dir.display()))
            })?;
            Ok(Some(dir))
        }
        (None, false) => Ok(None),
        (None, true) => Err(CliError::Config(
            "no output directory: pass --out or set output.dir in the config".to_string(),
        )),
    }
}

fn cmd_run(config_path: &Path, out_flag: Option<&Path>) -> Result<u8, CliError> {
    let cfg: RunConfig = load_json(config_path)?;
    validate_common(&cfg.topology, cfg.solver.t)?;
    let seed_override = env_seed_override()?;
    let out_dir = resolve_out_dir(
        out_flag,
        cfg.output.as_ref().map(|o| o.dir.as_path()),
        true,
    )?
    .expect("required output dir");

    let topology = build_topology(&cfg.topology, seed_override)?;
    let built = build_problem(
        &cfg.problem,
        cfg.solver.variant,
        topology.summary.m,
        &config_dir(config_path),
        seed_override,
    )?;
    let reference = cfg
        .reference
        .as_ref()
        .map(|spec| compute_reference(&built.problem, spec))
        .transpose()?;
    let (sched, sched_summary) =
        build_schedule(&cfg.solver, &built.problem, &topology.gossip, cfg.problem.mu)?;

    let result = execute(&built.problem, &topology.gossip, &sched, reference.as_ref())?;

    write_csv(&out_dir.join("metrics.csv"), &result.metrics)?;
    let summary = RunSummary {
        topology: topology.summary,
        problem: built.summary,
        solver: sched_summary,
        reference: cfg.reference.as_ref().zip(reference.as_ref()).map(|(spec, r)| {
            ReferenceSummary {
                tol: spec.tol,
                cap: spec.cap,
                f_star: r.f_star,
            }
        }),
        result: ResultSummary::from_run(&result),
        seed_env_override: seed_override.is_some(),
    };
    write_json(&out_dir.join("summary.json"), &summary)?;

    match result.diverged_at {
        Some(t) => {
            eprintln!("run diverged at iteration {t}; partial metrics written");
            Ok(3)
        }
        None => {
            println!(
                "run complete: {} iterations, {} gradient evals, {} rounds -> {}",
                summary.result.iterations_completed,
                summary.result.grads_total,
                summary.result.rounds_total,
                out_dir.display()
            );
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct TopologyOutput {
    kind: String,
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    default_k_main: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    default_k_extension: Option<usize>,
    report: ValidationReport,
}

fn cmd_topology(config_path: &Path, out_flag: Option<&Path>) -> Result<u8, CliError> {
    // Accept any config that carries a `topology` block.
    let raw: serde_json::Value = load_json(config_path)?;
    let spec_value = raw.get("topology").cloned().ok_or_else(|| {
        CliError::Config(format!("{}: missing `topology` block", config_path.display()))
    })?;
    let spec: TopologySpec = serde_json::from_value(spec_value)
        .map_err(|e| CliError::Config(format!("{}: {e}", config_path.display())))?;
    let seed_override = env_seed_override()?;

    let output = match &spec {
        TopologySpec::RawIdentity { m } => {
            let w = odapg::ndarray::Array2::<f64>::eye(*m);
            TopologyOutput {
                kind: spec.kind_name().to_string(),
                m: *m,
                edges: None,
                lambda2: None,
                gap: None,
                eta_w: None,
                default_k_main: None,
                default_k_extension: None,
                report: validate_gossip(&w),
            }
        }
        _ => {
            let topology = build_topology(&spec, seed_override)?;
            let report = validate_gossip(topology.gossip.matrix());
            TopologyOutput {
                kind: spec.kind_name().to_string(),
                m: topology.summary.m,
                edges: Some(topology.summary.edges),
                lambda2: Some(topology.summary.lambda2),
                gap: Some(topology.summary.gap),
                eta_w: Some(topology.summary.eta_w),
                default_k_main: Some(default_k(topology.summary.gap, MixRegime::Main)),
                default_k_extension: Some(default_k(topology.summary.gap, MixRegime::Extension)),
                report,
            }
        }
    };

    let rendered = serde_json::to_string_pretty(&output)
        .map_err(|e| CliError::Config(format!("json render failed: {e}")))?;
    println!("{rendered}");
    if let Some(dir) = resolve_out_dir(out_flag, None, false)? {
        write_json(&dir.join("topology.json"), &output)?;
    }
    Ok(if output.report.all_pass() { 0 } else { 1 })
}

fn cmd_compare(config_path: &Path, out_flag: Option<&Path>) -> Result<u8, CliError> {
    let cfg: CompareConfig = load_json(config_path)?;
    if cfg.solvers.len() < 2 {
        return Err(CliError::Config(format!(
            "compare needs at least 2 solvers, got {}",
            cfg.solvers.len()
        )));
    }
    validate_common(&cfg.topology, cfg.solvers[0].t)?;
    for spec in &cfg.solvers {
        if spec.t < 1 {
            return Err(CliError::Config("every solver needs t >= 1".to_string()));
        }
    }
    {
        let mut labels: Vec<String> = cfg.solvers.iter().map(|s| s.label()).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != cfg.solvers.len() {
            return Err(CliError::Config(
                "solver labels must be unique (set `label` explicitly)".to_string(),
            ));
        }
    }
    let seed_override = env_seed_override()?;
    let out_dir = resolve_out_dir(
        out_flag,
        cfg.output.as_ref().map(|o| o.dir.as_path()),
        true,
    )?
    .expect("required output dir");

    let topology = build_topology(&cfg.topology, seed_override)?;
    let dir = config_dir(config_path);

    // Shared objective for the reference solve; every variant minimizes
    // the same F.
    let shared = build_problem(
        &cfg.problem,
        config::Variant::Odapg,
        topology.summary.m,
        &dir,
        seed_override,
    )?;
    let reference = cfg
        .reference
        .as_ref()
        .map(|spec| compute_reference(&shared.problem, spec))
        .transpose()?;

    let thresholds = [1e-3, 1e-6];
    let mut entries = Vec::new();
    let mut any_diverged = false;

    for spec in &cfg.solvers {
        let label = spec.label();
        let built = build_problem(
            &cfg.problem,
            spec.variant,
            topology.summary.m,
            &dir,
            seed_override,
        )?;
        let (sched, sched_summary) =
            build_schedule(spec, &built.problem, &topology.gossip, cfg.problem.mu)?;
        let result = execute(&built.problem, &topology.gossip, &sched, reference.as_ref())?;
        any_diverged |= result.diverged_at.is_some();

        write_csv(&out_dir.join(format!("{label}.csv")), &result.metrics)?;
        let mut reached = BTreeMap::new();
        for threshold in thresholds {
            reached.insert(format!("{threshold:e}"), reached_at(&result.metrics, threshold));
        }
        entries.push(CompareEntry {
            label,
            solver: sched_summary,
            result: ResultSummary::from_run(&result),
            reached,
        });
    }

    let mut ranking_by_grads = BTreeMap::new();
    let mut ranking_by_rounds = BTreeMap::new();
    for threshold in thresholds {
        let key = format!("{threshold:e}");
        ranking_by_grads.insert(key.clone(), rank(&entries, &key, false));
        ranking_by_rounds.insert(key.clone(), rank(&entries, &key, true));
    }

    let summary = CompareSummary {
        topology: topology.summary,
        problem: shared.summary,
        reference: cfg.reference.as_ref().zip(reference.as_ref()).map(|(spec, r)| {
            ReferenceSummary {
                tol: spec.tol,
                cap: spec.cap,
                f_star: r.f_star,
            }
        }),
        thresholds: thresholds.to_vec(),
        solvers: entries,
        ranking_by_grads,
        ranking_by_rounds,
        seed_env_override: seed_override.is_some(),
    };
    write_json(&out_dir.join("compare.json"), &summary)?;
    println!(
        "compare complete: {} solvers -> {}",
        summary.solvers.len(),
        out_dir.display()
    );
    Ok(if any_diverged { 3 } else { 0 })
}
