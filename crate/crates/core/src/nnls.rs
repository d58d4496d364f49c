//! Non-negative least squares (Lawson–Hanson active set method).
//!
//! Solves `min ||A x - b||` subject to `x >= 0`. The problems solved here are
//! tiny (tens of unknowns), so a dense active-set loop with an SVD-based
//! subproblem solve is plenty.

use nalgebra::{DMatrix, DVector};

const SVD_EPS: f64 = 1e-12;

/// Lawson–Hanson NNLS. Returns the non-negative minimizer of ||A x - b||.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];

    // Tolerance on the dual vector w = Aᵀ(b - Ax), scaled to the problem.
    let scale = a.amax().max(b.amax()).max(1.0);
    let tol = 1e-12 * scale * (n as f64);

    let max_outer = 3 * n + 30;
    for _ in 0..max_outer {
        let residual = b - a * &x;
        let w = a.transpose() * residual;

        // Most infeasible coordinate among the active (clamped) set.
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if !passive[i] && w[i] > tol {
                match best {
                    Some((_, bw)) if bw >= w[i] => {}
                    _ => best = Some((i, w[i])),
                }
            }
        }
        let Some((enter, _)) = best else {
            break; // KKT satisfied
        };
        passive[enter] = true;

        // Inner loop: restrict to the passive set until the subproblem
        // solution is strictly feasible.
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let sub = a.select_columns(idx.iter());
            let z_sub = sub
                .svd(true, true)
                .solve(b, SVD_EPS)
                .expect("SVD solve on dense submatrix");

            if z_sub.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z_sub[k];
                }
                break;
            }

            // Step toward z as far as feasibility allows, then drop the
            // coordinates that hit zero.
            let mut alpha = f64::INFINITY;
            for (k, &i) in idx.iter().enumerate() {
                if z_sub[k] <= 0.0 {
                    let denom = x[i] - z_sub[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                break;
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z_sub[k] - x[i]);
            }
            for &i in &idx {
                if x[i] <= tol.max(f64::EPSILON) {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    x
}
