//! Network graphs and the gossip matrix.
//!
//! Agents communicate along an undirected connected graph. Mixing is driven
//! by `W = I - L/λ₁(L)` where `L` is the unweighted graph Laplacian and
//! `λ₁(L)` its largest eigenvalue. That `W` is symmetric, positive
//! semi-definite, row-stochastic, conforms to the edge set, and has its
//! second-largest eigenvalue `λ₂ < 1` exactly when the graph is connected —
//! the properties [`validate_gossip`] checks clause by clause.

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{largest_eigenvalue, symmetric_eigenvalues};

/// Resample budget for random graph draws that come out disconnected.
const ER_MAX_ATTEMPTS: usize = 1000;

/// Deterministic test topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Ring,
    Path,
    Complete,
    Star,
}

/// Undirected simple connected graph on agents `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    m: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Build a graph from an edge list. Pairs are normalized to `(lo, hi)`;
    /// self-loops, out-of-range endpoints, and disconnected inputs are
    /// rejected.
    pub fn new(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph needs at least 2 agents, got {m}"
            )));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at agent {a}")));
            }
            if a >= m || b >= m {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a},{b}) out of range for m={m}"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let graph = Graph { m, edges: set };
        if !graph.is_connected() {
            return Err(Error::InvalidParameter("graph is disconnected".to_string()));
        }
        Ok(graph)
    }

    pub fn agents(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == i || b == i)
            .count()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.m];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.m];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Erdős–Rényi draw: each unordered pair is an edge with probability `p`.
///
/// Disconnected draws are resampled on a deterministic seed chain (same
/// base seed, next stream) so results are reproducible; after
/// [`ER_MAX_ATTEMPTS`] failures the edge probability is reported as too
/// small for `m`.
pub fn generate_er_graph(m: usize, p: f64, seed: u64) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "random graph needs at least 2 agents, got {m}"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in (0, 1], got {p}"
        )));
    }
    for attempt in 0..ER_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut edges = Vec::new();
        for a in 0..m {
            for b in (a + 1)..m {
                if rng.random_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        if let Ok(graph) = Graph::new(m, edges) {
            return Ok(graph);
        }
    }
    Err(Error::ConnectivityFailure {
        m,
        p,
        attempts: ER_MAX_ATTEMPTS,
    })
}

/// One of the named deterministic topologies on `m ≥ 2` agents.
pub fn builtin_graph(kind: GraphKind, m: usize) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "builtin graph needs at least 2 agents, got {m}"
        )));
    }
    let edges: Vec<(usize, usize)> = match kind {
        GraphKind::Ring => (0..m).map(|i| (i, (i + 1) % m)).collect(),
        GraphKind::Path => (0..m - 1).map(|i| (i, i + 1)).collect(),
        GraphKind::Complete => (0..m)
            .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
            .collect(),
        GraphKind::Star => (1..m).map(|i| (0, i)).collect(),
    };
    Graph::new(m, edges)
}

/// Unweighted graph Laplacian `L = D - A`. Row sums are zero.
pub fn laplacian(g: &Graph) -> Array2<f64> {
    let m = g.agents();
    let mut l = Array2::<f64>::zeros((m, m));
    for &(a, b) in g.edges() {
        l[(a, b)] = -1.0;
        l[(b, a)] = -1.0;
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
    }
    l
}

/// Gossip matrix with cached spectral quantities.
///
/// `lambda2` is the second-largest eigenvalue of `W`, `gap = 1 - λ₂`, and
/// `eta_w = 1/(1 + √(1 - λ₂²))` is the momentum used by accelerated gossip.
#[derive(Debug, Clone)]
pub struct GossipMatrix {
    w: Array2<f64>,
    lambda2: f64,
    gap: f64,
    eta_w: f64,
}

impl GossipMatrix {
    pub fn agents(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn eta_w(&self) -> f64 {
        self.eta_w
    }

    /// Degenerate single-agent network: `W = [1]` with zero momentum, so
    /// mixing is bitwise the identity.
    pub fn single_agent() -> Self {
        GossipMatrix {
            w: Array2::from_elem((1, 1), 1.0),
            lambda2: 0.0,
            gap: 1.0,
            eta_w: 0.0,
        }
    }

    /// Exact averaging matrix `11ᵀ/m` with zero momentum: a single mixing
    /// step lands every agent exactly on the mean. This is the
    /// centralized-equivalence oracle topology.
    pub fn averaging(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("averaging matrix needs m >= 1".into()));
        }
        Ok(GossipMatrix {
            w: Array2::from_elem((m, m), 1.0 / m as f64),
            lambda2: 0.0,
            gap: 1.0,
            eta_w: 0.0,
        })
    }
}

fn eta_from_lambda2(lambda2: f64) -> f64 {
    1.0 / (1.0 + (1.0 - lambda2 * lambda2).sqrt())
}

/// Build `W = I - L/λ₁(L)` for a connected graph and cache its spectrum.
pub fn gossip_matrix(g: &Graph) -> Result<GossipMatrix> {
    let m = g.agents();
    let l = laplacian(g);
    let lambda1 = largest_eigenvalue(&l)?;
    let mut w = l.mapv(|v| -v / lambda1);
    for i in 0..m {
        w[(i, i)] += 1.0;
    }
    let eigs = symmetric_eigenvalues(&w)?;
    // Rounding can push the second eigenvalue a few ulp outside [0, 1];
    // the matrix is PSD with spectrum in [0, 1] by construction.
    let lambda2 = eigs[m - 2].clamp(0.0, 1.0);
    Ok(GossipMatrix {
        w,
        lambda2,
        gap: 1.0 - lambda2,
        eta_w: eta_from_lambda2(lambda2),
    })
}

/// One checked property of a candidate gossip matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    /// Measured quantity the clause compares against its threshold.
    pub measured: f64,
    pub threshold: f64,
}

/// Clause-by-clause report on a candidate gossip matrix. Failures are
/// entries, never errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub clauses: Vec<Clause>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

/// Check the gossip-matrix contract on a raw square matrix: symmetry,
/// unit row sums, positive semi-definiteness, spectrum within `[0, 1]`,
/// and `λ₂ < 1` (the connectivity clause).
pub fn validate_gossip(w: &Array2<f64>) -> ValidationReport {
    let m = w.nrows();
    let mut clauses = Vec::new();

    let mut asym = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            asym = asym.max((w[(i, j)] - w[(j, i)]).abs());
        }
    }
    clauses.push(Clause {
        name: "symmetric".to_string(),
        pass: asym <= 1e-12,
        measured: asym,
        threshold: 1e-12,
    });

    let mut row_dev = 0.0f64;
    for i in 0..m {
        let sum: f64 = (0..m).map(|j| w[(i, j)]).sum();
        row_dev = row_dev.max((sum - 1.0).abs());
    }
    clauses.push(Clause {
        name: "row_sums_one".to_string(),
        pass: row_dev <= 1e-10,
        measured: row_dev,
        threshold: 1e-10,
    });

    // Spectrum-dependent clauses come from the symmetric part.
    let (min_eig, max_eig, lambda2) = match symmetric_eigenvalues(w) {
        Ok(eigs) if m >= 1 => {
            let lambda2 = if m >= 2 { eigs[m - 2] } else { f64::NAN };
            (eigs[0], eigs[m - 1], lambda2)
        }
        _ => (f64::NAN, f64::NAN, f64::NAN),
    };
    clauses.push(Clause {
        name: "positive_semidefinite".to_string(),
        pass: min_eig >= -1e-10,
        measured: min_eig,
        threshold: -1e-10,
    });
    clauses.push(Clause {
        name: "spectrum_at_most_one".to_string(),
        pass: max_eig <= 1.0 + 1e-10,
        measured: max_eig,
        threshold: 1.0 + 1e-10,
    });
    clauses.push(Clause {
        name: "second_eigenvalue_below_one".to_string(),
        pass: lambda2 < 1.0 - 1e-10,
        measured: lambda2,
        threshold: 1.0 - 1e-10,
    });

    ValidationReport { clauses }
}
