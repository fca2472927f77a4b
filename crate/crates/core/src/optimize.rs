//! Levenberg–Marquardt least squares with finite-difference Jacobians.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once `‖r‖` falls below this.
    pub tol: f64,
    pub initial_damping: f64,
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-13,
            initial_damping: 1e-3,
            fd_step: 1e-7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Minimise `‖r(x)‖²` where `f(x, r)` fills the `m` residuals.
pub fn levenberg_marquardt<F>(mut f: F, m: usize, x0: &[f64], opts: &LmOptions) -> LmResult
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    f(&x, &mut r);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = opts.initial_damping;
    let mut jac = DMatrix::<f64>::zeros(m, n);
    let mut rp = vec![0.0; m];
    let mut rm = vec![0.0; m];
    let mut trial = vec![0.0; n];
    let mut iterations = 0;
    while iterations < opts.max_iter && cost.sqrt() > opts.tol {
        iterations += 1;
        for j in 0..n {
            let h = opts.fd_step * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            f(&xp, &mut rp);
            xp[j] -= 2.0 * h;
            f(&xp, &mut rm);
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * (jtj[(k, k)] + 1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            for k in 0..n {
                trial[k] = x[k] + step[k];
            }
            f(&trial, &mut rp);
            let tc: f64 = rp.iter().map(|v| v * v).sum();
            if tc.is_finite() && tc < cost {
                x.copy_from_slice(&trial);
                r.copy_from_slice(&rp);
                cost = tc;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    LmResult {
        x,
        residual_norm: cost.sqrt(),
        iterations,
    }
}
