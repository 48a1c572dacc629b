//! The decentralized accelerated proximal-gradient iteration.
//!
//! One outer step, in order:
//!
//! 1. `x⁺ = τ z + (1-τ) y` (momentum combination)
//! 2. local gradients at `x⁺`
//! 3. `s⁺ = FastMix(s + ∇f(x⁺) - ∇f(x), K)` (gradient tracking)
//! 4. `ẑ⁺ = prox_{γg}(z - γ s⁺)`, then `z⁺ = FastMix(ẑ⁺, K)`
//! 5. `y⁺ = FastMix(τ z⁺ + (1-τ) y, K)`
//!
//! Three parameter regimes drive the same skeleton: a constant schedule
//! for strongly convex `g`, a growing-step schedule for merely convex `g`,
//! and a shifted variant for strongly convex smooth parts (the ridge is
//! moved from `f_i` into the prox via the standard rescaling identity).
//! A non-accelerated gradient-tracking baseline (`τ ≡ 1`, no `y`
//! sequence) serves as the comparison point.

mod reference;

pub use reference::{centralized_reference, centralized_reference_from, Reference};

use std::time::Instant;

use ndarray::ArrayView1;

use crate::consensus::{fast_mix, AgentStates, CommLedger};
use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::objective::{aggregate_prox, gradient_rows, CompositeProblem, GradLedger};
use crate::topology::GossipMatrix;

/// Step-size multiplier in the general-convex schedule.
pub const GENERAL_CONVEX_CF: f64 = 200.0;

/// Parameter regime plus run lengths. `inner_steps` is the gossip depth
/// `K` per mixing call; `iterations` is the outer step count `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Constant `γ = 1/(20√(Lμ))`, `τ = μγ` for a `μ`-strongly convex
    /// regularizer.
    StronglyConvex {
        gamma: f64,
        tau: f64,
        inner_steps: usize,
        iterations: usize,
    },
    /// `γ_t = (t+4)/(2 L c_f)`, `τ_t = 2/(t+4)` with `c_f = 200`, for a
    /// merely convex regularizer.
    GeneralConvex {
        smoothness: f64,
        inner_steps: usize,
        iterations: usize,
    },
    /// Constant `γ̂ = 1/(20√((L-μ)μ))`, `τ̂ = μγ̂` for `μ`-strongly convex
    /// locals and a merely convex regularizer; gradients are evaluated on
    /// the ridge-shifted locals and the prox is rescaled accordingly.
    Extension {
        gamma: f64,
        tau: f64,
        /// Strong-convexity modulus of the locals.
        mu: f64,
        inner_steps: usize,
        iterations: usize,
    },
    /// Non-accelerated gradient-tracking proximal descent with constant
    /// `γ ≤ 1/(2L)`.
    Baseline {
        gamma: f64,
        inner_steps: usize,
        iterations: usize,
    },
}

impl Schedule {
    pub fn strongly_convex(l: f64, mu: f64, inner_steps: usize, iterations: usize) -> Result<Self> {
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::RegimeMismatch(format!(
                "strongly convex schedule needs mu > 0, got {mu}"
            )));
        }
        if l.is_nan() || l < mu {
            return Err(Error::RegimeMismatch(format!(
                "strongly convex schedule needs L >= mu, got L={l}, mu={mu}"
            )));
        }
        let gamma = 1.0 / (20.0 * (l * mu).sqrt());
        Ok(Schedule::StronglyConvex {
            gamma,
            tau: mu * gamma,
            inner_steps,
            iterations,
        })
    }

    pub fn general_convex(l: f64, inner_steps: usize, iterations: usize) -> Result<Self> {
        if l.is_nan() || l <= 0.0 {
            return Err(Error::RegimeMismatch(format!(
                "general convex schedule needs L > 0, got {l}"
            )));
        }
        Ok(Schedule::GeneralConvex {
            smoothness: l,
            inner_steps,
            iterations,
        })
    }

    /// `mu` is the strong convexity of the locals; requires `L ≥ 2μ > 0`.
    pub fn extension(l: f64, mu: f64, inner_steps: usize, iterations: usize) -> Result<Self> {
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::RegimeMismatch(format!(
                "extension schedule needs mu > 0, got {mu}"
            )));
        }
        if l.is_nan() || l < 2.0 * mu {
            return Err(Error::RegimeMismatch(format!(
                "extension schedule needs L >= 2 mu, got L={l}, mu={mu}"
            )));
        }
        let gamma = 1.0 / (20.0 * ((l - mu) * mu).sqrt());
        Ok(Schedule::Extension {
            gamma,
            tau: mu * gamma,
            mu,
            inner_steps,
            iterations,
        })
    }

    /// Baseline with explicit step size, validated against `γ ≤ 1/(2L)`.
    pub fn baseline(gamma: f64, l: f64, inner_steps: usize, iterations: usize) -> Result<Self> {
        if gamma.is_nan() || gamma <= 0.0 || gamma > 0.5 / l {
            return Err(Error::InvalidParameter(format!(
                "baseline step size must satisfy 0 < gamma <= 1/(2L); got gamma={gamma}, L={l}"
            )));
        }
        Ok(Schedule::Baseline {
            gamma,
            inner_steps,
            iterations,
        })
    }

    /// Baseline at the default `γ = 1/(2L)`.
    pub fn baseline_default(l: f64, inner_steps: usize, iterations: usize) -> Result<Self> {
        Self::baseline(0.5 / l, l, inner_steps, iterations)
    }

    /// Step size at outer iteration `t` (1-based).
    pub fn gamma(&self, t: usize) -> f64 {
        match *self {
            Schedule::StronglyConvex { gamma, .. }
            | Schedule::Extension { gamma, .. }
            | Schedule::Baseline { gamma, .. } => gamma,
            Schedule::GeneralConvex { smoothness, .. } => {
                (t as f64 + 4.0) / (2.0 * smoothness * GENERAL_CONVEX_CF)
            }
        }
    }

    /// Momentum weight at outer iteration `t` (1-based); the baseline
    /// runs at `τ ≡ 1`.
    pub fn tau(&self, t: usize) -> f64 {
        match *self {
            Schedule::StronglyConvex { tau, .. } | Schedule::Extension { tau, .. } => tau,
            Schedule::GeneralConvex { .. } => 2.0 / (t as f64 + 4.0),
            Schedule::Baseline { .. } => 1.0,
        }
    }

    pub fn inner_steps(&self) -> usize {
        match *self {
            Schedule::StronglyConvex { inner_steps, .. }
            | Schedule::GeneralConvex { inner_steps, .. }
            | Schedule::Extension { inner_steps, .. }
            | Schedule::Baseline { inner_steps, .. } => inner_steps,
        }
    }

    pub fn iterations(&self) -> usize {
        match *self {
            Schedule::StronglyConvex { iterations, .. }
            | Schedule::GeneralConvex { iterations, .. }
            | Schedule::Extension { iterations, .. }
            | Schedule::Baseline { iterations, .. } => iterations,
        }
    }

    /// Mixing calls per outer iteration: three for the accelerated
    /// variants, two for the baseline (which has no `y` mix).
    pub fn mixes_per_iteration(&self) -> u64 {
        match self {
            Schedule::Baseline { .. } => 2,
            _ => 3,
        }
    }
}

/// Full iterate set plus cost ledgers.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Iterate index; initialization is `t = 1`.
    pub t: usize,
    pub x: AgentStates,
    pub y: AgentStates,
    pub z: AgentStates,
    pub s: AgentStates,
    /// Pre-mix prox output `ẑ_t`, kept as a diagnostic.
    pub z_hat: AgentStates,
    /// Tracked gradient at the current `x` (shifted in the extension
    /// regime), cached for the next tracking difference.
    prev_grad: AgentStates,
    pub grads: GradLedger,
    pub comms: CommLedger,
}

impl SolverState {
    /// Consensus initialization at `x1`: all of `x`, `y`, `z` hold `x1`,
    /// and `s` holds the (possibly shifted) local gradients at `x1`.
    /// The initialization gradient is not charged to the ledger, which
    /// counts per-iteration work.
    pub fn init(
        p: &CompositeProblem,
        sched: &Schedule,
        x1: ArrayView1<f64>,
    ) -> Result<SolverState> {
        if x1.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                context: "initial point dimension",
                expected: p.dim(),
                got: x1.len(),
            });
        }
        let m = p.agents();
        let x = AgentStates::consensus(m, x1);
        let mut s = gradient_rows(p, &x)?;
        if let Schedule::Extension { mu, .. } = *sched {
            let mut values = s.into_matrix();
            values.zip_mut_with(x.matrix(), |si, xi| *si -= mu * xi);
            s = AgentStates::from_matrix(values);
        }
        Ok(SolverState {
            t: 1,
            y: x.clone(),
            z: x.clone(),
            z_hat: x.clone(),
            prev_grad: s.clone(),
            s,
            x,
            grads: GradLedger::new(),
            comms: CommLedger::new(),
        })
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self.x.all_finite()
            && self.y.all_finite()
            && self.z.all_finite()
            && self.s.all_finite()
            && self.z_hat.all_finite();
        if finite {
            Ok(())
        } else {
            Err(Error::NonFiniteState { t: self.t })
        }
    }
}

fn combine(a: f64, x: &AgentStates, b: f64, y: &AgentStates) -> AgentStates {
    let mut values = x.matrix() * a;
    values.zip_mut_with(y.matrix(), |v, yi| *v += b * yi);
    AgentStates::from_matrix(values)
}

/// One accelerated step under a strongly-convex or general-convex
/// schedule. Ledgers grow by `m` gradients and `3K` rounds.
pub fn odapg_step(
    state: &mut SolverState,
    p: &CompositeProblem,
    w: &GossipMatrix,
    sched: &Schedule,
) -> Result<()> {
    match sched {
        Schedule::StronglyConvex { .. } | Schedule::GeneralConvex { .. } => {}
        _ => {
            return Err(Error::RegimeMismatch(
                "odapg_step needs a strongly-convex or general-convex schedule".to_string(),
            ))
        }
    }
    let t = state.t;
    let gamma = sched.gamma(t);
    let tau = sched.tau(t);
    let k = sched.inner_steps();

    let x_next = combine(tau, &state.z, 1.0 - tau, &state.y);
    let grad_next = gradient_rows(p, &x_next)?;
    state.grads.add(p.agents() as u64);

    let tracking_input = {
        let mut values = state.s.matrix() + grad_next.matrix();
        values.zip_mut_with(state.prev_grad.matrix(), |v, g| *v -= g);
        AgentStates::from_matrix(values)
    };
    let s_next = fast_mix(&tracking_input, w, k, None, &mut state.comms)?;

    let prox_input = combine(1.0, &state.z, -gamma, &s_next);
    let z_hat_next = aggregate_prox(p.regularizer(), gamma, &prox_input);
    let z_next = fast_mix(&z_hat_next, w, k, None, &mut state.comms)?;

    let y_mix_input = combine(tau, &z_next, 1.0 - tau, &state.y);
    let y_next = fast_mix(&y_mix_input, w, k, None, &mut state.comms)?;

    state.x = x_next;
    state.y = y_next;
    state.z = z_next;
    state.s = s_next;
    state.z_hat = z_hat_next;
    state.prev_grad = grad_next;
    state.t = t + 1;
    state.check_finite()
}

/// One accelerated step for `μ`-strongly convex locals and a merely
/// convex regularizer: gradients are shifted by `-μx` and the prox is
/// replaced by `prox_{γ̂/(1+μγ̂) g}( (z - γ̂s⁺)/(1+μγ̂) )`.
pub fn odapg_extension_step(
    state: &mut SolverState,
    p: &CompositeProblem,
    w: &GossipMatrix,
    sched: &Schedule,
) -> Result<()> {
    let Schedule::Extension { gamma, tau, mu, .. } = *sched else {
        return Err(Error::RegimeMismatch(
            "odapg_extension_step needs an extension schedule".to_string(),
        ));
    };
    if p.modulus() > 0.0 {
        return Err(Error::RegimeMismatch(format!(
            "extension regime needs a plain convex regularizer, got modulus {}",
            p.modulus()
        )));
    }
    if mu > 0.0 && p.smoothness() < 2.0 * mu {
        return Err(Error::RegimeMismatch(format!(
            "extension regime needs L >= 2 mu, got L={}, mu={mu}",
            p.smoothness()
        )));
    }
    let t = state.t;
    let k = sched.inner_steps();

    let x_next = combine(tau, &state.z, 1.0 - tau, &state.y);
    let shifted_grad = {
        let raw = gradient_rows(p, &x_next)?;
        let mut values = raw.into_matrix();
        values.zip_mut_with(x_next.matrix(), |g, xi| *g -= mu * xi);
        AgentStates::from_matrix(values)
    };
    state.grads.add(p.agents() as u64);

    let tracking_input = {
        let mut values = state.s.matrix() + shifted_grad.matrix();
        values.zip_mut_with(state.prev_grad.matrix(), |v, g| *v -= g);
        AgentStates::from_matrix(values)
    };
    let s_next = fast_mix(&tracking_input, w, k, None, &mut state.comms)?;

    let shrink = 1.0 + mu * gamma;
    let prox_input = combine(1.0 / shrink, &state.z, -gamma / shrink, &s_next);
    let z_hat_next = aggregate_prox(p.regularizer(), gamma / shrink, &prox_input);
    let z_next = fast_mix(&z_hat_next, w, k, None, &mut state.comms)?;

    let y_mix_input = combine(tau, &z_next, 1.0 - tau, &state.y);
    let y_next = fast_mix(&y_mix_input, w, k, None, &mut state.comms)?;

    state.x = x_next;
    state.y = y_next;
    state.z = z_next;
    state.s = s_next;
    state.z_hat = z_hat_next;
    state.prev_grad = shifted_grad;
    state.t = t + 1;
    state.check_finite()
}

/// One baseline step: gradient tracking on `z`, prox, mix. Equivalent to
/// the accelerated step at `τ ≡ 1` (so `x ≡ z` and the `y` sequence is
/// dropped). Ledgers grow by `m` gradients and `2K` rounds.
pub fn baseline_proxgt_step(
    state: &mut SolverState,
    p: &CompositeProblem,
    w: &GossipMatrix,
    sched: &Schedule,
) -> Result<()> {
    let Schedule::Baseline { gamma, .. } = *sched else {
        return Err(Error::RegimeMismatch(
            "baseline_proxgt_step needs a baseline schedule".to_string(),
        ));
    };
    let t = state.t;
    let k = sched.inner_steps();

    let x_next = state.z.clone();
    let grad_next = gradient_rows(p, &x_next)?;
    state.grads.add(p.agents() as u64);

    let tracking_input = {
        let mut values = state.s.matrix() + grad_next.matrix();
        values.zip_mut_with(state.prev_grad.matrix(), |v, g| *v -= g);
        AgentStates::from_matrix(values)
    };
    let s_next = fast_mix(&tracking_input, w, k, None, &mut state.comms)?;

    let prox_input = combine(1.0, &state.z, -gamma, &s_next);
    let z_hat_next = aggregate_prox(p.regularizer(), gamma, &prox_input);
    let z_next = fast_mix(&z_hat_next, w, k, None, &mut state.comms)?;

    state.x = x_next;
    state.y = z_next.clone();
    state.z = z_next;
    state.s = s_next;
    state.z_hat = z_hat_next;
    state.prev_grad = grad_next;
    state.t = t + 1;
    state.check_finite()
}

/// A completed (or divergence-aborted) run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: SolverState,
    /// One record per completed iteration, in order.
    pub metrics: Vec<MetricsRecord>,
    /// Iteration at which a non-finite state appeared, if any; metrics
    /// stop at the last valid iterate.
    pub diverged_at: Option<usize>,
    /// True when a suboptimality reading fell below `-10 × reference
    /// tolerance` before clamping.
    pub suboptimality_clamped: bool,
}

/// Initialize at `x1` and take `iterations` steps, recording one
/// [`MetricsRecord`] after each. Objective values for the records are
/// plain function evaluations and never touch the gradient ledger.
pub fn run(
    p: &CompositeProblem,
    w: &GossipMatrix,
    sched: &Schedule,
    x1: ArrayView1<f64>,
    reference: Option<&Reference>,
) -> Result<RunResult> {
    if w.agents() != p.agents() {
        return Err(Error::DimensionMismatch {
            context: "gossip matrix vs problem agents",
            expected: p.agents(),
            got: w.agents(),
        });
    }
    let mut state = SolverState::init(p, sched, x1)?;
    let mut metrics = Vec::with_capacity(sched.iterations());
    let mut diverged_at = None;
    let mut clamped = false;
    let start = Instant::now();

    for _ in 0..sched.iterations() {
        let stepped = match sched {
            Schedule::StronglyConvex { .. } | Schedule::GeneralConvex { .. } => {
                odapg_step(&mut state, p, w, sched)
            }
            Schedule::Extension { .. } => odapg_extension_step(&mut state, p, w, sched),
            Schedule::Baseline { .. } => baseline_proxgt_step(&mut state, p, w, sched),
        };
        match stepped {
            Ok(()) => {}
            Err(Error::NonFiniteState { t }) => {
                diverged_at = Some(t);
                break;
            }
            Err(other) => return Err(other),
        }
        metrics.push(measure(&state, p, reference, &mut clamped, &start));
    }

    if clamped {
        log::warn!("suboptimality fell below -10x reference tolerance; clamped");
    }
    Ok(RunResult {
        state,
        metrics,
        diverged_at,
        suboptimality_clamped: clamped,
    })
}

fn measure(
    state: &SolverState,
    p: &CompositeProblem,
    reference: Option<&Reference>,
    clamped: &mut bool,
    start: &Instant,
) -> MetricsRecord {
    let y_mean = state.y.mean_row();
    let (suboptimality, sq_dist) = match reference {
        Some(r) => {
            let raw = p.objective_value(y_mean.view()) - r.f_star;
            let floor = -10.0 * r.tol;
            if raw < floor {
                *clamped = true;
            }
            (
                Some(raw.max(floor)),
                Some(state.z.sq_distance_to(r.x_star.view())),
            )
        }
        None => (None, None),
    };
    MetricsRecord {
        t: state.t,
        suboptimality,
        sq_dist,
        consensus_x: state.x.consensus_error(),
        consensus_z: state.z.consensus_error(),
        consensus_s: state.s.consensus_error(),
        grads_cumulative: state.grads.evals(),
        rounds_cumulative: state.comms.rounds(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}
