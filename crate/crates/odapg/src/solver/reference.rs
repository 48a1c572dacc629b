//! High-precision centralized solve of the composite problem, used to
//! produce `x*` and `F*` for convergence diagnostics.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::objective::CompositeProblem;

/// Reference solution against which runs are measured.
#[derive(Debug, Clone)]
pub struct Reference {
    pub x_star: Array1<f64>,
    pub f_star: f64,
    /// Gradient-mapping tolerance the solve met.
    pub tol: f64,
}

impl Reference {
    pub fn compute(p: &CompositeProblem, tol: f64, cap: usize) -> Result<Reference> {
        let (x_star, f_star) = centralized_reference(p, tol, cap)?;
        Ok(Reference { x_star, f_star, tol })
    }
}

/// Accelerated proximal gradient on `f̄ = (1/m) Σ f_i` with the prox of
/// `g`, restarted momentum, starting from the origin. Stops when the
/// composite gradient-mapping norm drops to `tol`; hitting `cap` first is
/// reported with the residual achieved.
pub fn centralized_reference(
    p: &CompositeProblem,
    tol: f64,
    cap: usize,
) -> Result<(Array1<f64>, f64)> {
    let origin = Array1::zeros(p.dim());
    centralized_reference_from(p, origin.view(), tol, cap)
}

/// Same solve from an explicit starting point.
pub fn centralized_reference_from(
    p: &CompositeProblem,
    x0: ArrayView1<f64>,
    tol: f64,
    cap: usize,
) -> Result<(Array1<f64>, f64)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "reference tolerance must be positive, got {tol}"
        )));
    }
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "reference starting point",
            expected: p.dim(),
            got: x0.len(),
        });
    }
    let l = p.smoothness();
    if l <= 0.0 {
        // Smooth part is constant; one prox step solves the problem.
        let x = p.regularizer().prox(1.0, x0);
        let f = p.objective_value(x.view());
        return Ok((x, f));
    }
    let gamma = 1.0 / l;

    let mut x_prev = x0.to_owned();
    let mut y = x0.to_owned();
    let mut theta = 1.0f64;
    let mut achieved = f64::INFINITY;

    for _ in 0..cap {
        let grad = p.mean_gradient(y.view());
        let step = &y - &(gamma * &grad);
        let x = p.regularizer().prox(gamma, step.view());

        // Composite gradient mapping at y.
        let mapping_norm = (&y - &x).iter().map(|v| v * v).sum::<f64>().sqrt() / gamma;
        achieved = mapping_norm;
        if mapping_norm <= tol {
            let f = p.objective_value(x.view());
            return Ok((x, f));
        }

        // Momentum with a restart whenever the update turns against the
        // previous direction of travel.
        let restart: f64 = (&y - &x)
            .iter()
            .zip((&x - &x_prev).iter())
            .map(|(a, b)| a * b)
            .sum();
        let theta_next;
        if restart > 0.0 {
            theta_next = 1.0;
            y = x.clone();
        } else {
            theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let beta = (theta - 1.0) / theta_next;
            y = &x + &(beta * &(&x - &x_prev));
        }
        theta = theta_next;
        x_prev = x;
    }

    Err(Error::NoConvergence {
        cap,
        achieved,
        tol,
    })
}
