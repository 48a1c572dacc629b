//! CSV and JSON persistence.
//!
//! The metrics CSV has a fixed header
//! `t,suboptimality,sq_dist,consensus_x,consensus_z,consensus_s,grads_cumulative,rounds_cumulative`
//! (one row per iteration; the two reference-dependent columns are empty
//! when no reference was computed). Identical configurations produce
//! byte-identical CSV files; wall-clock time appears only in the JSON
//! summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::Serialize;

use odapg::metrics::MetricsRecord;
use odapg::solver::RunResult;

use crate::config::CliError;
use crate::runner::{ProblemSummary, ScheduleSummary, TopologySummary};

pub fn write_csv(path: &Path, metrics: &[MetricsRecord]) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let mut writer = csv::Writer::from_writer(file);
    for record in metrics {
        writer
            .serialize(record)
            .map_err(|e| CliError::Config(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Config(format!("csv flush failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
pub fn read_csv(path: &Path) -> Result<Vec<MetricsRecord>, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::Reader::from_reader(file);
    reader
        .deserialize()
        .collect::<Result<Vec<MetricsRecord>, _>>()
        .map_err(|e| CliError::Config(format!("csv parse failed: {e}")))
}

#[derive(Debug, Serialize)]
pub struct ReferenceSummary {
    pub tol: f64,
    pub cap: usize,
    pub f_star: f64,
}

#[derive(Debug, Serialize)]
pub struct ResultSummary {
    pub iterations_completed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<usize>,
    pub grads_total: u64,
    pub rounds_total: u64,
    pub suboptimality_clamped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_suboptimality: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_sq_dist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_consensus_z: Option<f64>,
    pub wall_ms_total: f64,
}

impl ResultSummary {
    pub fn from_run(result: &RunResult) -> Self {
        let last = result.metrics.last();
        ResultSummary {
            iterations_completed: result.metrics.len(),
            diverged_at: result.diverged_at,
            grads_total: result.state.grads.evals(),
            rounds_total: result.state.comms.rounds(),
            suboptimality_clamped: result.suboptimality_clamped,
            final_suboptimality: last.and_then(|r| r.suboptimality),
            final_sq_dist: last.and_then(|r| r.sq_dist),
            final_consensus_z: last.map(|r| r.consensus_z),
            wall_ms_total: last.map(|r| r.wall_ms).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub topology: TopologySummary,
    pub problem: ProblemSummary,
    pub solver: ScheduleSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSummary>,
    pub result: ResultSummary,
    pub seed_env_override: bool,
}

/// How far a run got toward a suboptimality threshold.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Reached {
    At { t: usize, grads: u64, rounds: u64 },
    NotReached(&'static str),
}

pub fn reached_at(metrics: &[MetricsRecord], threshold: f64) -> Reached {
    for record in metrics {
        if let Some(gap) = record.suboptimality {
            if gap <= threshold {
                return Reached::At {
                    t: record.t,
                    grads: record.grads_cumulative,
                    rounds: record.rounds_cumulative,
                };
            }
        }
    }
    Reached::NotReached("not reached")
}

#[derive(Debug, Serialize)]
pub struct CompareEntry {
    pub label: String,
    pub solver: ScheduleSummary,
    pub result: ResultSummary,
    /// Threshold (as printed) → first crossing.
    pub reached: BTreeMap<String, Reached>,
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub topology: TopologySummary,
    pub problem: ProblemSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSummary>,
    pub thresholds: Vec<f64>,
    pub solvers: Vec<CompareEntry>,
    /// Threshold → labels ordered by gradient evaluations to target
    /// (unreached runs last).
    pub ranking_by_grads: BTreeMap<String, Vec<String>>,
    /// Threshold → labels ordered by communication rounds to target.
    pub ranking_by_rounds: BTreeMap<String, Vec<String>>,
    pub seed_env_override: bool,
}

pub fn rank(
    entries: &[CompareEntry],
    threshold_key: &str,
    by_rounds: bool,
) -> Vec<String> {
    let mut keyed: Vec<(u64, &str)> = entries
        .iter()
        .map(|entry| {
            let cost = match entry.reached.get(threshold_key) {
                Some(Reached::At { grads, rounds, .. }) => {
                    if by_rounds {
                        *rounds
                    } else {
                        *grads
                    }
                }
                _ => u64::MAX,
            };
            (cost, entry.label.as_str())
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)));
    keyed.into_iter().map(|(_, label)| label.to_string()).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    serde_json::to_writer_pretty(file, value)
        .map_err(|e| CliError::Config(format!("json write failed: {e}")))?;
    Ok(())
}
