//! Sequential minimal optimization for the binary soft-margin C-SVM dual.
//!
//! Minimizes `0.5 a^T Q a - e^T a` subject to `y^T a = 0`, `0 <= a_i <= C`
//! with `Q_ij = y_i y_j K_ij`. The working pair is the maximal violating
//! pair; the two coefficients are updated analytically with exact clipping
//! to the box, so `0 <= a_i <= C` holds bit-exactly after every step.

use ndarray::Array2;

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug)]
pub(crate) struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision offset: `f(x) = sum_i a_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Final maximal KKT violation `m(a) - M(a)`.
    pub kkt_residual: f64,
    /// Dual objective (maximization form) after each update, when recorded.
    pub objective_trace: Vec<f64>,
}

pub(crate) fn solve(
    gram: &Array2<f64>,
    y: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
    record_objective: bool,
) -> Result<SmoSolution> {
    let n = y.len();
    debug_assert_eq!(gram.dim(), (n, n));
    let mut alpha = vec![0.0f64; n];
    // Gradient of the minimization objective: G = Q a - e.
    let mut grad = vec![-1.0f64; n];
    let mut trace = Vec::new();
    if record_objective {
        trace.push(0.0);
    }

    let mut iterations = 0usize;
    loop {
        // Maximal violating pair.
        let mut m_up = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        let mut m_low = f64::INFINITY;
        let mut j_sel = usize::MAX;
        for t in 0..n {
            let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
            let val = -y[t] * grad[t];
            if in_up && val > m_up {
                m_up = val;
                i_sel = t;
            }
            if in_low && val < m_low {
                m_low = val;
                j_sel = t;
            }
        }
        let residual = m_up - m_low;
        if residual <= tol || i_sel == usize::MAX || j_sel == usize::MAX {
            let kkt_residual = if residual.is_finite() { residual } else { 0.0 };
            let rho = compute_rho(&alpha, &grad, y, c);
            return Ok(SmoSolution {
                alpha,
                rho,
                iterations,
                kkt_residual,
                objective_trace: trace,
            });
        }
        if iterations >= max_iter {
            return Err(Error::Convergence {
                message: format!("SMO hit the iteration cap ({max_iter})"),
                residual,
            });
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let old_ai = alpha[i];
        let old_aj = alpha[j];
        let quad = (gram[[i, i]] + gram[[j, j]] - 2.0 * gram[[i, j]]).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let dai = alpha[i] - old_ai;
        let daj = alpha[j] - old_aj;
        for t in 0..n {
            grad[t] += y[t] * y[i] * gram[[t, i]] * dai + y[t] * y[j] * gram[[t, j]] * daj;
        }
        if record_objective {
            // D(a) = sum a - 0.5 a^T Q a = 0.5 * sum a_i (1 - G_i).
            let d: f64 = (0..n).map(|t| alpha[t] * (1.0 - grad[t])).sum::<f64>() * 0.5;
            trace.push(d);
        }
    }
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (upper + lower) / 2.0
    }
}
