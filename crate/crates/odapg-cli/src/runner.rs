//! Assembly of configured experiments: topology, problem, reference,
//! schedule, and the run itself.

use std::path::Path;

use serde::Serialize;

use odapg::consensus::{default_k, MixRegime};
use odapg::objective::{
    elastic_net, logistic_local, partition, read_libsvm, synth_logistic, CompositeProblem,
    Dataset, RidgeAugmented, SmoothLocal,
};
use odapg::solver::{run, Reference, RunResult, Schedule};
use odapg::topology::{
    builtin_graph, generate_er_graph, gossip_matrix, GossipMatrix, GraphKind,
};
use odapg::Error;

use crate::config::{
    CliError, DataSpec, ProblemSpec, ReferenceSpec, Regime, SolverSpec, TopologySpec, Variant,
};

#[derive(Debug, Clone, Serialize)]
pub struct TopologySummary {
    pub kind: &'static str,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub edges: usize,
    pub lambda2: f64,
    pub gap: f64,
    pub eta_w: f64,
}

pub struct BuiltTopology {
    pub gossip: GossipMatrix,
    pub summary: TopologySummary,
}

pub fn build_topology(
    spec: &TopologySpec,
    seed_override: Option<u64>,
) -> Result<BuiltTopology, CliError> {
    let graph = match *spec {
        TopologySpec::Er { m, p, seed } => {
            generate_er_graph(m, p, seed_override.unwrap_or(seed)).map_err(map_build_error)?
        }
        TopologySpec::Ring { m } => builtin_graph(GraphKind::Ring, m).map_err(map_build_error)?,
        TopologySpec::Path { m } => builtin_graph(GraphKind::Path, m).map_err(map_build_error)?,
        TopologySpec::Complete { m } => {
            builtin_graph(GraphKind::Complete, m).map_err(map_build_error)?
        }
        TopologySpec::Star { m } => builtin_graph(GraphKind::Star, m).map_err(map_build_error)?,
        TopologySpec::RawIdentity { .. } => {
            return Err(CliError::Config(
                "raw_identity is only valid for the topology subcommand".to_string(),
            ))
        }
    };
    let gossip = gossip_matrix(&graph).map_err(map_build_error)?;
    let (p, seed) = match *spec {
        TopologySpec::Er { p, seed, .. } => (Some(p), Some(seed_override.unwrap_or(seed))),
        _ => (None, None),
    };
    let summary = TopologySummary {
        kind: spec.kind_name(),
        m: graph.agents(),
        p,
        seed,
        edges: graph.edges().len(),
        lambda2: gossip.lambda2(),
        gap: gossip.gap(),
        eta_w: gossip.eta_w(),
    };
    Ok(BuiltTopology { gossip, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub source: String,
    pub sigma: f64,
    pub mu: f64,
    pub d: usize,
    pub n_total: usize,
    pub smoothness: f64,
}

pub struct BuiltProblem {
    pub problem: CompositeProblem,
    pub summary: ProblemSummary,
}

fn load_datasets(
    data: &DataSpec,
    m: usize,
    config_dir: &Path,
    seed_override: Option<u64>,
) -> Result<(Vec<Dataset>, String), CliError> {
    match data {
        DataSpec::Synthetic { n_per_agent, d, seed } => {
            let seed = seed_override.unwrap_or(*seed);
            Ok((
                synth_logistic(m, *n_per_agent, *d, seed),
                format!("synthetic(n_per_agent={n_per_agent}, d={d}, seed={seed})"),
            ))
        }
        DataSpec::Libsvm {
            path,
            d_hint,
            partition: scheme,
            partition_seed,
        } => {
            let resolved = if path.is_absolute() {
                path.clone()
            } else {
                config_dir.join(path)
            };
            if !resolved.is_file() {
                return Err(CliError::Config(format!(
                    "dataset file not found: {}",
                    resolved.display()
                )));
            }
            let pooled = read_libsvm(&resolved, *d_hint).map_err(map_build_error)?;
            let seed = seed_override.unwrap_or(*partition_seed);
            let parts = partition(&pooled, m, *scheme, seed).map_err(map_build_error)?;
            Ok((
                parts,
                format!("libsvm({}, partition={scheme:?}, seed={seed})", resolved.display()),
            ))
        }
    }
}

/// Assemble the composite problem for a given algorithm variant.
///
/// All variants minimize the same `F`: mean logistic loss plus
/// `σ‖x‖₁ + (μ/2)‖x‖²`. For `odapg_ext` the ridge moves into the smooth
/// locals (making them strongly convex) and the regularizer keeps only
/// the L1 part.
pub fn build_problem(
    spec: &ProblemSpec,
    variant: Variant,
    m: usize,
    config_dir: &Path,
    seed_override: Option<u64>,
) -> Result<BuiltProblem, CliError> {
    if spec.sigma < 0.0 || spec.mu < 0.0 {
        return Err(CliError::Config(
            "sigma and mu must be nonnegative".to_string(),
        ));
    }
    let (datasets, source) = load_datasets(&spec.data, m, config_dir, seed_override)?;
    let d = datasets[0].dim();
    let n_total: usize = datasets.iter().map(|ds| ds.samples()).sum();

    let (locals, reg): (Vec<Box<dyn SmoothLocal>>, _) = match variant {
        Variant::OdapgExt => {
            let locals = datasets
                .iter()
                .map(|ds| {
                    let base = logistic_local(ds).map_err(map_build_error)?;
                    Ok(Box::new(RidgeAugmented::new(base, spec.mu).map_err(map_build_error)?)
                        as Box<dyn SmoothLocal>)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let reg = elastic_net(spec.sigma, 0.0).map_err(map_build_error)?;
            (locals, reg)
        }
        Variant::Odapg | Variant::Baseline => {
            let locals = datasets
                .iter()
                .map(|ds| {
                    Ok(Box::new(logistic_local(ds).map_err(map_build_error)?)
                        as Box<dyn SmoothLocal>)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let reg = elastic_net(spec.sigma, spec.mu).map_err(map_build_error)?;
            (locals, reg)
        }
    };
    let problem = CompositeProblem::new(locals, Box::new(reg), d).map_err(map_build_error)?;
    let summary = ProblemSummary {
        source,
        sigma: spec.sigma,
        mu: spec.mu,
        d,
        n_total,
        smoothness: problem.smoothness(),
    };
    Ok(BuiltProblem { problem, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleSummary {
    pub variant: Variant,
    pub schedule: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_f: Option<f64>,
    pub k: usize,
    pub t: usize,
}

pub fn build_schedule(
    spec: &SolverSpec,
    problem: &CompositeProblem,
    gossip: &GossipMatrix,
    problem_mu: f64,
) -> Result<(Schedule, ScheduleSummary), CliError> {
    let l = problem.smoothness();
    let mix_regime = match spec.variant {
        Variant::OdapgExt => MixRegime::Extension,
        _ => MixRegime::Main,
    };
    let k = spec.k.unwrap_or_else(|| default_k(gossip.gap(), mix_regime));
    if k == 0 {
        return Err(CliError::Config("k must be at least 1".to_string()));
    }

    let overrides = (spec.gamma, spec.tau);
    let sched = match spec.variant {
        Variant::Odapg => match spec.regime {
            Some(Regime::StronglyConvex) => match overrides {
                (None, None) => {
                    Schedule::strongly_convex(l, problem_mu, k, spec.t).map_err(map_config_error)?
                }
                (Some(gamma), Some(tau)) => Schedule::StronglyConvex {
                    gamma,
                    tau,
                    inner_steps: k,
                    iterations: spec.t,
                },
                _ => {
                    return Err(CliError::Config(
                        "gamma and tau overrides must be given together".to_string(),
                    ))
                }
            },
            Some(Regime::GeneralConvex) => {
                if overrides != (None, None) {
                    return Err(CliError::Config(
                        "the general-convex schedule does not take gamma/tau overrides"
                            .to_string(),
                    ));
                }
                Schedule::general_convex(l, k, spec.t).map_err(map_config_error)?
            }
            None => {
                return Err(CliError::Config(
                    "variant odapg needs a regime (strongly_convex or general_convex)"
                        .to_string(),
                ))
            }
        },
        Variant::OdapgExt => match overrides {
            (None, None) => {
                Schedule::extension(l, problem_mu, k, spec.t).map_err(map_config_error)?
            }
            (Some(gamma), Some(tau)) => Schedule::Extension {
                gamma,
                tau,
                mu: problem_mu,
                inner_steps: k,
                iterations: spec.t,
            },
            _ => {
                return Err(CliError::Config(
                    "gamma and tau overrides must be given together".to_string(),
                ))
            }
        },
        Variant::Baseline => {
            if spec.tau.is_some() {
                return Err(CliError::Config(
                    "the baseline has no tau parameter".to_string(),
                ));
            }
            match spec.gamma {
                Some(gamma) => Schedule::baseline(gamma, l, k, spec.t).map_err(map_config_error)?,
                None => Schedule::baseline_default(l, k, spec.t).map_err(map_config_error)?,
            }
        }
    };

    let summary = match sched {
        Schedule::StronglyConvex { gamma, tau, .. } => ScheduleSummary {
            variant: spec.variant,
            schedule: "strongly_convex",
            gamma: Some(gamma),
            tau: Some(tau),
            c_f: None,
            k,
            t: spec.t,
        },
        Schedule::GeneralConvex { .. } => ScheduleSummary {
            variant: spec.variant,
            schedule: "general_convex",
            gamma: None,
            tau: None,
            c_f: Some(odapg::solver::GENERAL_CONVEX_CF),
            k,
            t: spec.t,
        },
        Schedule::Extension { gamma, tau, .. } => ScheduleSummary {
            variant: spec.variant,
            schedule: "extension",
            gamma: Some(gamma),
            tau: Some(tau),
            c_f: None,
            k,
            t: spec.t,
        },
        Schedule::Baseline { gamma, .. } => ScheduleSummary {
            variant: spec.variant,
            schedule: "baseline",
            gamma: Some(gamma),
            tau: None,
            c_f: None,
            k,
            t: spec.t,
        },
    };
    Ok((sched, summary))
}

pub fn compute_reference(
    problem: &CompositeProblem,
    spec: &ReferenceSpec,
) -> Result<Reference, CliError> {
    if spec.tol <= 0.0 || spec.cap == 0 {
        return Err(CliError::Config(
            "reference needs tol > 0 and cap >= 1".to_string(),
        ));
    }
    Reference::compute(problem, spec.tol, spec.cap).map_err(|e| match e {
        Error::NoConvergence { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Config(other.to_string()),
    })
}

pub fn execute(
    problem: &CompositeProblem,
    gossip: &GossipMatrix,
    sched: &Schedule,
    reference: Option<&Reference>,
) -> Result<RunResult, CliError> {
    let x1 = odapg::ndarray::Array1::zeros(problem.dim());
    run(problem, gossip, sched, x1.view(), reference)
        .map_err(|e| CliError::Numerical(e.to_string()))
}

/// Construction-stage errors are configuration problems; anything
/// spectral or iterative is a numerical failure.
fn map_build_error(e: Error) -> CliError {
    match e {
        Error::SpectralFailure { .. } | Error::NoConvergence { .. } | Error::NonFiniteState { .. } => {
            CliError::Numerical(e.to_string())
        }
        other => CliError::Config(other.to_string()),
    }
}

fn map_config_error(e: Error) -> CliError {
    CliError::Config(e.to_string())
}
