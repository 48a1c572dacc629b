//! Per-iteration convergence diagnostics.

use serde::{Deserialize, Serialize};

/// One row of run diagnostics, taken after each outer iteration.
///
/// `t` is the iterate index (the initial state is iterate 1, so a run of
/// `T` steps records `t = 2..=T+1`). `suboptimality` and `sq_dist` are
/// present only when a reference solution was supplied. `wall_ms` is
/// cumulative wall-clock time; it is kept out of serialized rows so that
/// identical configurations produce identical output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Iterate index.
    pub t: usize,
    /// `F(ȳ_t) - F*`, clamped below at `-10 × reference tolerance`.
    pub suboptimality: Option<f64>,
    /// `‖z_t - 1x*‖²`.
    pub sq_dist: Option<f64>,
    /// `‖Πx_t‖`.
    pub consensus_x: f64,
    /// `‖Πz_t‖`.
    pub consensus_z: f64,
    /// `‖Πs_t‖`.
    pub consensus_s: f64,
    /// Local gradient evaluations so far, summed over agents.
    pub grads_cumulative: u64,
    /// Single-hop communication rounds so far.
    pub rounds_cumulative: u64,
    #[serde(skip_serializing, default)]
    pub wall_ms: f64,
}
