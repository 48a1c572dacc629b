//! Decentralized composite convex optimization over a simulated agent network.
//!
//! `m` agents, each holding a private smooth convex loss `f_i`, cooperate to
//! minimize `F(x) = (1/m) Σ f_i(x) + g(x)` where `g` is a (possibly
//! non-smooth) regularizer with a cheap proximal operator. Agents exchange
//! state only along the edges of an undirected connected graph, modeled here
//! by repeated application of a gossip matrix `W`.
//!
//! The crate provides:
//!
//! - [`topology`]: graph generators, the gossip matrix `W = I - L/λ₁(L)`,
//!   and its spectral diagnostics (`λ₂`, spectral gap, mixing momentum).
//! - [`consensus`]: agent-state matrices, the accelerated gossip primitive
//!   [`consensus::fast_mix`], and consensus-error functionals.
//! - [`objective`]: smooth local losses (logistic, quadratic), proximable
//!   regularizers (elastic net), aggregate gradient/prox operators, and
//!   dataset ingestion (libsvm text format, synthetic generators).
//! - [`solver`]: the accelerated decentralized proximal-gradient iteration
//!   in its strongly-convex, general-convex, and strongly-convex-smooth
//!   parameter regimes, a non-accelerated gradient-tracking baseline, and a
//!   high-precision centralized reference solver.
//! - [`metrics`]: per-iteration convergence diagnostics.
//!
//! Everything runs single-process: the "network" is a matrix product, and
//! communication cost is tracked by explicit ledgers rather than sockets.

pub mod consensus;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod objective;
pub mod solver;
pub mod topology;

pub use error::{Error, Result};

// The public API trades in ndarray types; re-export the crate so
// downstream code stays on the same version.
pub use ndarray;
