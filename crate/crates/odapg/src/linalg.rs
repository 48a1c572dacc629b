//! Dense symmetric eigenvalue computation.
//!
//! A cyclic Jacobi iteration is all the spectral machinery this crate needs:
//! the matrices involved (graph Laplacians, gossip matrices, Gram matrices
//! of per-agent data) are symmetric, dense, and small at simulation scale.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Relative off-diagonal mass at which the sweep is considered converged.
pub const EIGEN_TOL: f64 = 1e-12;

/// Sweep cap; Jacobi converges quadratically, so hitting this signals a
/// non-symmetric or non-finite input rather than a hard matrix.
const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix, sorted ascending.
///
/// The strictly upper triangle is ignored; the matrix is read as symmetric
/// from its lower triangle. Fails with [`Error::SpectralFailure`] if the
/// off-diagonal mass has not dropped below [`EIGEN_TOL`] (relative to the
/// Frobenius norm) after the sweep cap.
pub fn symmetric_eigenvalues(matrix: &Array2<f64>) -> Result<Vec<f64>> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::DimensionMismatch {
            context: "symmetric_eigenvalues",
            expected: n,
            got: matrix.ncols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    // Symmetrize from the lower triangle.
    let mut a = matrix.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            a[(i, j)] = a[(j, i)];
        }
    }

    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let tol = EIGEN_TOL * scale;

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(eigs);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::EPSILON * scale {
                    continue;
                }
                let (c, s) = jacobi_rotation(a[(p, p)], a[(q, q)], apq);
                apply_rotation(&mut a, p, q, c, s);
            }
        }
    }

    Err(Error::SpectralFailure {
        sweeps: MAX_SWEEPS,
        residual: off_diagonal_norm(&a),
    })
}

/// Largest eigenvalue of a symmetric matrix.
pub fn largest_eigenvalue(matrix: &Array2<f64>) -> Result<f64> {
    let eigs = symmetric_eigenvalues(matrix)?;
    eigs.last().copied().ok_or_else(|| {
        Error::InvalidParameter("largest_eigenvalue of an empty matrix".to_string())
    })
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Cosine/sine pair annihilating the (p,q) entry.
fn jacobi_rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

fn apply_rotation(a: &mut Array2<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
}
