//! JSON experiment configuration.
//!
//! A run config names a topology, a problem, one solver, and (optionally)
//! a reference solve and an output directory. A compare config carries a
//! list of solvers instead. Unknown fields are rejected so typos fail
//! loudly. Dataset paths are resolved relative to the config file.
//!
//! The `ODAPG_SEED` environment variable, when set, overrides every seed
//! in the config (graph sampling, synthetic data, partitioning).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use odapg::objective::PartitionScheme;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub topology: TopologySpec,
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub topology: TopologySpec,
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    Er { m: usize, p: f64, seed: u64 },
    Ring { m: usize },
    Path { m: usize },
    Complete { m: usize },
    Star { m: usize },
    /// Identity mixing matrix on `m` agents: a deliberately disconnected
    /// candidate for the `topology` validation subcommand. Not usable
    /// for runs.
    RawIdentity { m: usize },
}

impl TopologySpec {
    pub fn agents(&self) -> usize {
        match *self {
            TopologySpec::Er { m, .. }
            | TopologySpec::Ring { m }
            | TopologySpec::Path { m }
            | TopologySpec::Complete { m }
            | TopologySpec::Star { m }
            | TopologySpec::RawIdentity { m } => m,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TopologySpec::Er { .. } => "er",
            TopologySpec::Ring { .. } => "ring",
            TopologySpec::Path { .. } => "path",
            TopologySpec::Complete { .. } => "complete",
            TopologySpec::Star { .. } => "star",
            TopologySpec::RawIdentity { .. } => "raw_identity",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub data: DataSpec,
    /// L1 weight of the regularizer.
    pub sigma: f64,
    /// Ridge weight of the regularizer.
    pub mu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Synthetic {
        n_per_agent: usize,
        d: usize,
        seed: u64,
    },
    Libsvm {
        path: PathBuf,
        #[serde(default)]
        d_hint: Option<usize>,
        partition: PartitionScheme,
        #[serde(default)]
        partition_seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Odapg,
    OdapgExt,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    StronglyConvex,
    GeneralConvex,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub variant: Variant,
    /// Required for `odapg`, ignored otherwise.
    #[serde(default)]
    pub regime: Option<Regime>,
    /// Outer iterations.
    pub t: usize,
    /// Inner mixing depth; defaults to the spectral-gap rule.
    #[serde(default)]
    pub k: Option<usize>,
    /// Explicit step size (constant-parameter regimes only).
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Explicit momentum weight (constant-parameter regimes only).
    #[serde(default)]
    pub tau: Option<f64>,
}

impl SolverSpec {
    pub fn label(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match (self.variant, self.regime) {
            (Variant::Odapg, Some(Regime::GeneralConvex)) => "odapg-gc".to_string(),
            (Variant::Odapg, _) => "odapg".to_string(),
            (Variant::OdapgExt, _) => "odapg-ext".to_string(),
            (Variant::Baseline, _) => "baseline".to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub tol: f64,
    pub cap: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

/// Errors split by exit code: configuration problems exit 2, numerical
/// failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Seed override from the environment, if any.
pub fn env_seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var("ODAPG_SEED") {
        Ok(raw) => raw
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("ODAPG_SEED must be a u64, got {raw:?}"))),
        Err(_) => Ok(None),
    }
}

/// Basic semantic checks shared by run and compare.
pub fn validate_common(topology: &TopologySpec, first_solver_t: usize) -> Result<(), CliError> {
    if topology.agents() < 2 {
        return Err(CliError::Config(format!(
            "topology needs m >= 2 agents, got {}",
            topology.agents()
        )));
    }
    if first_solver_t < 1 {
        return Err(CliError::Config("solver needs t >= 1 iterations".to_string()));
    }
    Ok(())
}
