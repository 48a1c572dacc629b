//! Composite problems: smooth local losses plus a proximable regularizer.
//!
//! A [`CompositeProblem`] bundles `m` smooth convex locals `f_i` (one per
//! agent) with a single regularizer `g`, the global smoothness bound
//! `L = max_i L_i`, and the regularizer's strong-convexity modulus `μ`.
//! The aggregate operators evaluate gradients and proximal maps row-wise
//! over an [`AgentStates`] matrix.

mod data;

pub use data::{partition, read_libsvm, synth_logistic, Dataset, PartitionScheme};

use ndarray::{Array1, Array2, ArrayView1};

use crate::consensus::AgentStates;
use crate::error::{Error, Result};
use crate::linalg::largest_eigenvalue;

/// A smooth convex local objective with a known smoothness bound.
pub trait SmoothLocal: Send + Sync {
    fn value(&self, v: ArrayView1<f64>) -> f64;
    fn gradient(&self, v: ArrayView1<f64>) -> Array1<f64>;
    /// A valid global Lipschitz constant of the gradient.
    fn smoothness(&self) -> f64;
}

/// A convex regularizer with a cheap proximal operator.
pub trait Regularizer: Send + Sync {
    fn value(&self, v: ArrayView1<f64>) -> f64;
    /// `prox_{γg}(v) = argmin_w γ g(w) + ½‖w - v‖²` for `γ > 0`.
    fn prox(&self, gamma: f64, v: ArrayView1<f64>) -> Array1<f64>;
    /// Strong-convexity modulus `μ ≥ 0`.
    fn modulus(&self) -> f64;
}

/// `g(v) = σ‖v‖₁ + (μ/2)‖v‖²` with the closed-form prox
/// `soft(v, γσ)/(1 + γμ)` applied componentwise.
#[derive(Debug, Clone, Copy)]
pub struct ElasticNet {
    sigma: f64,
    mu: f64,
}

/// Soft-threshold: `sign(u)·max(|u| - τ, 0)`.
pub fn soft_threshold(u: f64, tau: f64) -> f64 {
    u.signum() * (u.abs() - tau).max(0.0)
}

pub fn elastic_net(sigma: f64, mu: f64) -> Result<ElasticNet> {
    if sigma < 0.0 || mu < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "elastic net weights must be nonnegative, got sigma={sigma}, mu={mu}"
        )));
    }
    Ok(ElasticNet { sigma, mu })
}

impl Regularizer for ElasticNet {
    fn value(&self, v: ArrayView1<f64>) -> f64 {
        let l1: f64 = v.iter().map(|x| x.abs()).sum();
        let sq: f64 = v.iter().map(|x| x * x).sum();
        self.sigma * l1 + 0.5 * self.mu * sq
    }

    fn prox(&self, gamma: f64, v: ArrayView1<f64>) -> Array1<f64> {
        let tau = gamma * self.sigma;
        let shrink = 1.0 + gamma * self.mu;
        v.mapv(|u| soft_threshold(u, tau) / shrink)
    }

    fn modulus(&self) -> f64 {
        self.mu
    }
}

/// `f(v) = ½ vᵀQv - bᵀv` for symmetric positive semi-definite `Q`;
/// smoothness is `λ_max(Q)`.
#[derive(Debug, Clone)]
pub struct QuadraticLocal {
    q: Array2<f64>,
    b: Array1<f64>,
    smoothness: f64,
}

impl QuadraticLocal {
    pub fn new(q: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        let d = b.len();
        if q.nrows() != d || q.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "quadratic local",
                expected: d,
                got: q.nrows(),
            });
        }
        let mut asym = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((q[(i, j)] - q[(j, i)]).abs());
            }
        }
        if asym > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "quadratic matrix is not symmetric (max deviation {asym:.3e})"
            )));
        }
        let eigs = crate::linalg::symmetric_eigenvalues(&q)?;
        let min = eigs.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::NonPsd {
                min_eigenvalue: min,
            });
        }
        let smoothness = eigs.last().copied().unwrap_or(0.0).max(0.0);
        Ok(QuadraticLocal { q, b, smoothness })
    }
}

impl SmoothLocal for QuadraticLocal {
    fn value(&self, v: ArrayView1<f64>) -> f64 {
        0.5 * v.dot(&self.q.dot(&v)) - self.b.dot(&v)
    }

    fn gradient(&self, v: ArrayView1<f64>) -> Array1<f64> {
        self.q.dot(&v) - &self.b
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }
}

/// Averaged logistic loss over one agent's samples:
/// `f(x) = (1/n) Σ_j log(1 + exp(-b_j ⟨a_j, x⟩))`.
///
/// Smoothness is the tight sigmoid bound `λ_max(AᵀA)/(4n)`.
#[derive(Debug, Clone)]
pub struct LogisticLocal {
    features: Array2<f64>,
    labels: Array1<f64>,
    smoothness: f64,
}

/// Overflow-safe `log(1 + exp(-t))`.
fn logistic_loss(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// Overflow-safe `σ(-t) = 1/(1 + exp(t))`.
fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

pub fn logistic_local(data: &Dataset) -> Result<LogisticLocal> {
    let n = data.samples();
    if n == 0 {
        return Err(Error::EmptyDataset(
            "logistic local needs at least one sample".to_string(),
        ));
    }
    let a = data.features();
    let gram = a.t().dot(a);
    let lambda_max = largest_eigenvalue(&gram)?.max(0.0);
    Ok(LogisticLocal {
        features: a.clone(),
        labels: data.labels().clone(),
        smoothness: lambda_max / (4.0 * n as f64),
    })
}

impl SmoothLocal for LogisticLocal {
    fn value(&self, v: ArrayView1<f64>) -> f64 {
        let margins = self.features.dot(&v);
        let n = self.labels.len() as f64;
        margins
            .iter()
            .zip(self.labels.iter())
            .map(|(m, b)| logistic_loss(b * m))
            .sum::<f64>()
            / n
    }

    fn gradient(&self, v: ArrayView1<f64>) -> Array1<f64> {
        let margins = self.features.dot(&v);
        let n = self.labels.len() as f64;
        // coefficient per sample: -b σ(-b⟨a,x⟩) / n
        let coeffs = Array1::from_iter(
            margins
                .iter()
                .zip(self.labels.iter())
                .map(|(m, b)| -b * sigmoid_neg(b * m) / n),
        );
        self.features.t().dot(&coeffs)
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }
}

/// Adds `(μ/2)‖v‖²` to an existing local, making it `μ`-strongly convex
/// and `(L + μ)`-smooth. Used to fold the ridge part of a composite
/// objective into the smooth side.
pub struct RidgeAugmented<L> {
    inner: L,
    ridge: f64,
}

impl<L: SmoothLocal> RidgeAugmented<L> {
    pub fn new(inner: L, ridge: f64) -> Result<Self> {
        if ridge < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ridge weight must be nonnegative, got {ridge}"
            )));
        }
        Ok(RidgeAugmented { inner, ridge })
    }
}

impl<L: SmoothLocal> SmoothLocal for RidgeAugmented<L> {
    fn value(&self, v: ArrayView1<f64>) -> f64 {
        self.inner.value(v) + 0.5 * self.ridge * v.dot(&v)
    }

    fn gradient(&self, v: ArrayView1<f64>) -> Array1<f64> {
        let mut g = self.inner.gradient(v);
        g.zip_mut_with(&v, |gi, vi| *gi += self.ridge * vi);
        g
    }

    fn smoothness(&self) -> f64 {
        self.inner.smoothness() + self.ridge
    }
}

/// The full problem: locals, regularizer, and the constants the solver
/// schedules are built from.
pub struct CompositeProblem {
    locals: Vec<Box<dyn SmoothLocal>>,
    reg: Box<dyn Regularizer>,
    d: usize,
    smoothness: f64,
}

impl CompositeProblem {
    /// Requires at least one local and `0 ≤ μ ≤ L`.
    pub fn new(
        locals: Vec<Box<dyn SmoothLocal>>,
        reg: Box<dyn Regularizer>,
        d: usize,
    ) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::InvalidParameter(
                "composite problem needs at least one local".to_string(),
            ));
        }
        let smoothness = locals
            .iter()
            .map(|l| l.smoothness())
            .fold(f64::NEG_INFINITY, f64::max);
        if !smoothness.is_finite() || smoothness < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "invalid smoothness bound {smoothness}"
            )));
        }
        let mu = reg.modulus();
        if mu < 0.0 || mu > smoothness {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= mu <= L, got mu={mu}, L={smoothness}"
            )));
        }
        Ok(CompositeProblem {
            locals,
            reg,
            d,
            smoothness,
        })
    }

    pub fn agents(&self) -> usize {
        self.locals.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Global smoothness bound `L = max_i L_i`.
    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    /// Strong-convexity modulus of the regularizer.
    pub fn modulus(&self) -> f64 {
        self.reg.modulus()
    }

    pub fn local(&self, i: usize) -> &dyn SmoothLocal {
        self.locals[i].as_ref()
    }

    pub fn regularizer(&self) -> &dyn Regularizer {
        self.reg.as_ref()
    }

    /// `f̄(v) = (1/m) Σ f_i(v)`.
    pub fn smooth_value(&self, v: ArrayView1<f64>) -> f64 {
        self.locals.iter().map(|l| l.value(v)).sum::<f64>() / self.agents() as f64
    }

    /// `∇f̄(v) = (1/m) Σ ∇f_i(v)`.
    pub fn mean_gradient(&self, v: ArrayView1<f64>) -> Array1<f64> {
        let mut g = Array1::zeros(self.d);
        for local in &self.locals {
            g += &local.gradient(v);
        }
        g / self.agents() as f64
    }

    /// `F(v) = f̄(v) + g(v)`.
    pub fn objective_value(&self, v: ArrayView1<f64>) -> f64 {
        self.smooth_value(v) + self.reg.value(v)
    }
}

/// Cumulative count of per-agent local gradient evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GradLedger {
    evals: u64,
}

impl GradLedger {
    pub fn new() -> Self {
        GradLedger::default()
    }

    pub fn evals(&self) -> u64 {
        self.evals
    }

    pub fn add(&mut self, evals: u64) {
        self.evals += evals;
    }
}

/// Row `i` of the result is `∇f_i(x⁽ⁱ⁾)`. Counts `m` gradient evaluations.
pub fn aggregate_gradient(
    p: &CompositeProblem,
    x: &AgentStates,
    ledger: &mut GradLedger,
) -> Result<AgentStates> {
    let out = gradient_rows(p, x)?;
    ledger.add(p.agents() as u64);
    Ok(out)
}

/// Gradient rows without ledger accounting; shared by the public op and
/// solver initialization (the ledger counts per-iteration work only).
pub(crate) fn gradient_rows(p: &CompositeProblem, x: &AgentStates) -> Result<AgentStates> {
    if x.agents() != p.agents() {
        return Err(Error::DimensionMismatch {
            context: "aggregate_gradient agents",
            expected: p.agents(),
            got: x.agents(),
        });
    }
    if x.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "aggregate_gradient dimension",
            expected: p.dim(),
            got: x.dim(),
        });
    }
    let mut values = Array2::zeros((p.agents(), p.dim()));
    for i in 0..p.agents() {
        values.row_mut(i).assign(&p.local(i).gradient(x.row(i)));
    }
    Ok(AgentStates::from_matrix(values))
}

/// Row-wise proximal map: row `i` of the result is `prox_{γg}(x⁽ⁱ⁾)`.
pub fn aggregate_prox(reg: &dyn Regularizer, gamma: f64, x: &AgentStates) -> AgentStates {
    let mut values = Array2::zeros((x.agents(), x.dim()));
    for i in 0..x.agents() {
        values.row_mut(i).assign(&reg.prox(gamma, x.row(i)));
    }
    AgentStates::from_matrix(values)
}

/// Averaged first-order gap of `f` between a point `y` and per-agent
/// linearization points:
/// `(1/m) Σ_i ( f_i(y) - f_i(x⁽ⁱ⁾) - ⟨∇f_i(x⁽ⁱ⁾), y - x⁽ⁱ⁾⟩ )`.
/// Non-negative for convex locals.
pub fn bregman_df(p: &CompositeProblem, y: ArrayView1<f64>, x: &AgentStates) -> f64 {
    let m = p.agents();
    let mut total = 0.0;
    for i in 0..m {
        let xi = x.row(i);
        let grad = p.local(i).gradient(xi);
        let lin: f64 = grad
            .iter()
            .zip(y.iter().zip(xi.iter()))
            .map(|(g, (yj, xj))| g * (yj - xj))
            .sum();
        total += p.local(i).value(y) - p.local(i).value(xi) - lin;
    }
    total / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, array};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Central finite differences, the gradient oracle for these tests.
    fn fd_gradient(f: &dyn Fn(ArrayView1<f64>) -> f64, x: &Array1<f64>, h: f64) -> Array1<f64> {
        let mut g = Array1::zeros(x.len());
        for i in 0..x.len() {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[i] += h;
            minus[i] -= h;
            g[i] = (f(plus.view()) - f(minus.view())) / (2.0 * h);
        }
        g
    }

    fn rel_err(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
        let diff = (a - b).iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        diff / norm
    }

    fn random_psd(d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Array2::from_shape_fn((d, d), |_| rng.random_range(-1.0..1.0));
        b.t().dot(&b)
    }

    #[test]
    fn logistic_single_sample_at_origin() {
        // One sample a = (1,0), b = +1: value log 2, gradient (-1/2, 0).
        let data = Dataset::new(array![[1.0, 0.0]], arr1(&[1.0])).unwrap();
        let local = logistic_local(&data).unwrap();
        let x0 = arr1(&[0.0, 0.0]);
        assert!((local.value(x0.view()) - 2.0f64.ln()).abs() <= 1e-15);
        let g = local.gradient(x0.view());
        assert!((g[0] + 0.5).abs() <= 1e-15);
        assert!(g[1].abs() <= 1e-15);
    }

    #[test]
    fn logistic_loss_decreases_along_correct_margin() {
        let data = Dataset::new(array![[1.0, -0.5], [0.3, 2.0]], arr1(&[1.0, -1.0])).unwrap();
        let local = logistic_local(&data).unwrap();
        // Direction classifying both samples correctly with growing margin.
        let dir = arr1(&[1.0, -1.0]);
        let mut prev = f64::INFINITY;
        for t in [0.0, 1.0, 5.0, 20.0, 100.0, 700.0] {
            let v = local.value((&dir * t).view());
            assert!(v.is_finite());
            assert!(v <= prev + 1e-15, "t={t}: {v} > {prev}");
            prev = v;
        }
        assert!(prev >= 0.0);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let features = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let labels = arr1(&[1.0, -1.0, 1.0, 1.0, -1.0]);
        let data = Dataset::new(features, labels).unwrap();
        let local = logistic_local(&data).unwrap();
        let x = arr1(&[0.2, -0.7, 0.4]);
        let fd = fd_gradient(&|v| local.value(v), &x, 1e-6);
        assert!(rel_err(&local.gradient(x.view()), &fd) <= 1e-6);
    }

    #[test]
    fn logistic_smoothness_is_gram_bound() {
        let features = array![[1.0, 0.0], [0.0, 2.0]];
        let data = Dataset::new(features.clone(), arr1(&[1.0, -1.0])).unwrap();
        let local = logistic_local(&data).unwrap();
        // λ_max(AᵀA) = 4, n = 2, so L = 4 / 8 = 0.5.
        assert!((local.smoothness() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn elastic_net_prox_closed_forms() {
        let g = elastic_net(1.0, 0.0).unwrap();
        assert!((g.prox(0.5, arr1(&[1.2]).view())[0] - 0.7).abs() <= 1e-15);
        assert_eq!(g.prox(0.5, arr1(&[-0.3]).view())[0], 0.0);

        let g = elastic_net(0.5, 1.0).unwrap();
        assert!((g.prox(1.0, arr1(&[2.0]).view())[0] - 0.75).abs() <= 1e-15);
    }

    #[test]
    fn elastic_net_rejects_negative_weights() {
        assert!(elastic_net(-1.0, 0.0).is_err());
        assert!(elastic_net(0.0, -0.1).is_err());
    }

    #[test]
    fn quadratic_examples() {
        let q = Array2::eye(2);
        let local = QuadraticLocal::new(q, arr1(&[0.0, 0.0])).unwrap();
        let v = arr1(&[3.0, 4.0]);
        assert!((local.value(v.view()) - 12.5).abs() <= 1e-12);
        assert_eq!(local.gradient(v.view()), v);
        assert!((local.smoothness() - 1.0).abs() <= 1e-12);

        let zero = QuadraticLocal::new(Array2::zeros((2, 2)), arr1(&[1.0, -2.0])).unwrap();
        assert_eq!(zero.gradient(v.view()), arr1(&[-1.0, 2.0]));
    }

    #[test]
    fn quadratic_gradient_matches_finite_differences() {
        let q = random_psd(4, 8);
        let local = QuadraticLocal::new(q, arr1(&[0.5, -1.0, 2.0, 0.0])).unwrap();
        let x = arr1(&[0.3, 0.9, -0.2, 1.1]);
        let fd = fd_gradient(&|v| local.value(v), &x, 1e-6);
        assert!(rel_err(&local.gradient(x.view()), &fd) <= 1e-6);
    }

    #[test]
    fn quadratic_rejects_indefinite_matrix() {
        let q = array![[1.0, 0.0], [0.0, -0.5]];
        assert!(matches!(
            QuadraticLocal::new(q, arr1(&[0.0, 0.0])),
            Err(Error::NonPsd { .. })
        ));
    }

    #[test]
    fn ridge_augmented_shifts_value_gradient_smoothness() {
        let q = Array2::eye(2);
        let inner = QuadraticLocal::new(q, arr1(&[0.0, 0.0])).unwrap();
        let ridged = RidgeAugmented::new(inner, 0.5).unwrap();
        let v = arr1(&[2.0, 0.0]);
        assert!((ridged.value(v.view()) - (2.0 + 1.0)).abs() <= 1e-14);
        assert_eq!(ridged.gradient(v.view()), arr1(&[3.0, 0.0]));
        assert!((ridged.smoothness() - 1.5).abs() <= 1e-14);
    }

    fn two_agent_identity_problem() -> CompositeProblem {
        let locals: Vec<Box<dyn SmoothLocal>> = vec![
            Box::new(QuadraticLocal::new(Array2::eye(1), arr1(&[0.0])).unwrap()),
            Box::new(QuadraticLocal::new(Array2::eye(1), arr1(&[0.0])).unwrap()),
        ];
        CompositeProblem::new(locals, Box::new(elastic_net(0.0, 0.0).unwrap()), 1).unwrap()
    }

    #[test]
    fn aggregate_gradient_rowwise_and_counted() {
        let p = two_agent_identity_problem();
        let x = AgentStates::from_matrix(array![[1.0], [2.0]]);
        let mut ledger = GradLedger::new();
        let g = aggregate_gradient(&p, &x, &mut ledger).unwrap();
        assert_eq!(g.matrix(), &array![[1.0], [2.0]]);
        assert_eq!(ledger.evals(), 2);

        let consensus = AgentStates::consensus(2, arr1(&[3.0]).view());
        let g = aggregate_gradient(&p, &consensus, &mut ledger).unwrap();
        for i in 0..2 {
            assert_eq!(g.row(i)[0], 3.0);
        }
        assert_eq!(ledger.evals(), 4);
    }

    #[test]
    fn aggregate_gradient_rejects_mismatched_dims() {
        let p = two_agent_identity_problem();
        let mut ledger = GradLedger::new();
        let too_many_agents = AgentStates::from_matrix(Array2::zeros((3, 1)));
        assert!(aggregate_gradient(&p, &too_many_agents, &mut ledger).is_err());
        let wrong_dim = AgentStates::from_matrix(Array2::zeros((2, 2)));
        assert!(aggregate_gradient(&p, &wrong_dim, &mut ledger).is_err());
        assert_eq!(ledger.evals(), 0);
    }

    #[test]
    fn aggregate_prox_is_rowwise() {
        let id = elastic_net(0.0, 0.0).unwrap();
        let x = AgentStates::from_matrix(array![[1.5, -2.0], [0.0, 3.0]]);
        let out = aggregate_prox(&id, 0.7, &x);
        assert_eq!(out.matrix(), x.matrix());

        let l1 = elastic_net(1.0, 0.0).unwrap();
        let x = AgentStates::from_matrix(array![[1.2], [-0.3]]);
        let out = aggregate_prox(&l1, 0.5, &x);
        assert!((out.matrix()[(0, 0)] - 0.7).abs() <= 1e-15);
        assert_eq!(out.matrix()[(1, 0)], 0.0);

        // Stacking rows equals stacking single-row prox calls.
        let rows = AgentStates::from_matrix(array![[0.9, -1.4], [2.2, 0.1]]);
        let stacked = aggregate_prox(&l1, 0.25, &rows);
        for i in 0..2 {
            let single = l1.prox(0.25, rows.row(i));
            for j in 0..2 {
                assert_eq!(stacked.matrix()[(i, j)], single[j]);
            }
        }
    }

    #[test]
    fn bregman_examples() {
        let p = two_agent_identity_problem();
        let x = AgentStates::consensus(2, arr1(&[0.5]).view());
        assert!(bregman_df(&p, arr1(&[0.5]).view(), &x).abs() <= 1e-15);

        let single: Vec<Box<dyn SmoothLocal>> = vec![Box::new(
            QuadraticLocal::new(Array2::eye(1), arr1(&[0.0])).unwrap(),
        )];
        let p1 =
            CompositeProblem::new(single, Box::new(elastic_net(0.0, 0.0).unwrap()), 1).unwrap();
        let x = AgentStates::from_matrix(array![[0.0]]);
        assert!((bregman_df(&p1, arr1(&[1.0]).view(), &x) - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn bregman_nonnegative_for_random_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for seed in 0..20 {
            let locals: Vec<Box<dyn SmoothLocal>> = (0..3)
                .map(|i| {
                    let q = random_psd(3, seed * 10 + i);
                    let b = Array1::from_shape_fn(3, |_| rng.random_range(-1.0..1.0));
                    Box::new(QuadraticLocal::new(q, b).unwrap()) as Box<dyn SmoothLocal>
                })
                .collect();
            let p =
                CompositeProblem::new(locals, Box::new(elastic_net(0.0, 0.0).unwrap()), 3).unwrap();
            let x = AgentStates::from_matrix(Array2::from_shape_fn((3, 3), |_| {
                rng.random_range(-2.0..2.0)
            }));
            let y = Array1::from_shape_fn(3, |_| rng.random_range(-2.0..2.0));
            assert!(bregman_df(&p, y.view(), &x) >= -1e-10);
        }
    }

    #[test]
    fn composite_rejects_mu_above_smoothness() {
        let locals: Vec<Box<dyn SmoothLocal>> = vec![Box::new(
            QuadraticLocal::new(Array2::eye(1), arr1(&[0.0])).unwrap(),
        )];
        let heavy_ridge = elastic_net(0.0, 5.0).unwrap();
        assert!(CompositeProblem::new(locals, Box::new(heavy_ridge), 1).is_err());
    }

    #[test]
    fn convexity_and_smoothness_inequalities_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let features = Array2::from_shape_fn((6, 4), |_| rng.random_range(-1.0..1.0));
        let labels = Array1::from_shape_fn(6, |_| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
        let data = Dataset::new(features, labels).unwrap();
        let local = logistic_local(&data).unwrap();
        let l = local.smoothness();
        for _ in 0..50 {
            let x = Array1::from_shape_fn(4, |_| rng.random_range(-3.0..3.0));
            let y = Array1::from_shape_fn(4, |_| rng.random_range(-3.0..3.0));
            let fx = local.value(x.view());
            let fy = local.value(y.view());
            let gx = local.gradient(x.view());
            let lin: f64 = gx.iter().zip(y.iter().zip(x.iter())).map(|(g, (yj, xj))| g * (yj - xj)).sum();
            let dist2: f64 = y.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(fy >= fx + lin - 1e-9, "convexity violated");
            assert!(fy <= fx + lin + 0.5 * l * dist2 + 1e-9, "smoothness violated");
        }
    }

    proptest! {
        /// Prox non-expansiveness: ‖prox(u) - prox(v)‖ ≤ ‖u - v‖.
        #[test]
        fn prox_is_nonexpansive(
            u in proptest::collection::vec(-10.0f64..10.0, 4),
            v in proptest::collection::vec(-10.0f64..10.0, 4),
            sigma in 0.0f64..3.0,
            mu in 0.0f64..3.0,
            gamma in 1e-3f64..5.0,
        ) {
            let g = elastic_net(sigma, mu).unwrap();
            let u = Array1::from_vec(u);
            let v = Array1::from_vec(v);
            let pu = g.prox(gamma, u.view());
            let pv = g.prox(gamma, v.view());
            let lhs = (&pu - &pv).iter().map(|x| x * x).sum::<f64>().sqrt();
            let rhs = (&u - &v).iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        /// Subgradient optimality of the elastic-net prox:
        /// 0 ∈ γσ ∂‖w‖₁ + γμ w + (w - v) componentwise.
        #[test]
        fn prox_satisfies_optimality_condition(
            v in proptest::collection::vec(-5.0f64..5.0, 5),
            sigma in 0.0f64..2.0,
            mu in 0.0f64..2.0,
            gamma in 1e-3f64..3.0,
        ) {
            let g = elastic_net(sigma, mu).unwrap();
            let v = Array1::from_vec(v);
            let w = g.prox(gamma, v.view());
            for j in 0..v.len() {
                let resid = gamma * mu * w[j] + w[j] - v[j];
                if w[j] != 0.0 {
                    prop_assert!((resid + gamma * sigma * w[j].signum()).abs() <= 1e-10);
                } else {
                    prop_assert!(resid.abs() <= gamma * sigma + 1e-10);
                }
            }
        }

        /// Strong convexity of the elastic net with modulus μ, using the
        /// subgradient σ·sgn(x) + μx (with sgn(0) = 0).
        #[test]
        fn elastic_net_is_mu_strongly_convex(
            x in proptest::collection::vec(-5.0f64..5.0, 4),
            y in proptest::collection::vec(-5.0f64..5.0, 4),
            sigma in 0.0f64..2.0,
            mu in 0.0f64..2.0,
        ) {
            let g = elastic_net(sigma, mu).unwrap();
            let x = Array1::from_vec(x);
            let y = Array1::from_vec(y);
            let sub: Array1<f64> = x.mapv(|v| {
                let sgn = if v == 0.0 { 0.0 } else { v.signum() };
                sigma * sgn + mu * v
            });
            let lin: f64 = sub
                .iter()
                .zip(y.iter().zip(x.iter()))
                .map(|(s, (yj, xj))| s * (yj - xj))
                .sum();
            let dist2: f64 = y.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            prop_assert!(
                g.value(y.view()) >= g.value(x.view()) + lin + 0.5 * mu * dist2 - 1e-9
            );
        }

        /// Aggregate-prox consensus bound:
        /// ‖prox(1x̄) - 1·mean(prox(x))‖ ≤ ‖Πx‖.
        #[test]
        fn prox_consensus_inequality(
            seed in 0u64..200,
            sigma in 0.0f64..2.0,
            mu in 0.0f64..2.0,
            gamma in 1e-3f64..3.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = elastic_net(sigma, mu).unwrap();
            let x = AgentStates::from_matrix(
                Array2::from_shape_fn((4, 3), |_| rng.random_range(-4.0..4.0)),
            );
            let mean = x.mean_row();
            let prox_of_mean = g.prox(gamma, mean.view());
            let mean_of_prox = aggregate_prox(&g, gamma, &x).mean_row();
            let m = x.agents() as f64;
            let lhs = (m * (&prox_of_mean - &mean_of_prox)
                .iter()
                .map(|d| d * d)
                .sum::<f64>())
            .sqrt();
            prop_assert!(lhs <= x.consensus_error() + 1e-12);
        }
    }
}
