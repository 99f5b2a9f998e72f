//! Levenberg–Marquardt nonlinear least squares with a finite-difference
//! Jacobian. Each damped step solves the augmented system [J; √μ·D] δ = [−r; 0]
//! by QR, avoiding the squared condition number of the normal equations.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::lstsq;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative step falls below this.
    pub x_tol: f64,
    /// Stop when the relative cost reduction falls below this.
    pub f_tol: f64,
    /// Relative finite-difference step.
    pub diff_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            x_tol: 1e-14,
            f_tol: 1e-24,
            diff_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub x: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
    pub iterations: usize,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes Σ rᵢ(x)² where `residuals(x, r)` fills `r` (length `m`).
pub fn levenberg_marquardt<F>(mut residuals: F, x0: &[f64], m: usize, opts: &LmOptions) -> Result<LmReport>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x0.len();
    if m < n || n == 0 {
        return Err(Error::Domain("fewer residuals than parameters"));
    }
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    residuals(&x, &mut r);
    let mut cost = sum_sq(&r);
    if !cost.is_finite() {
        return Err(Error::Domain("residuals not finite at the initial guess"));
    }
    let mut mu = 1e-3;
    let mut nu = 2.0;
    let mut jac = vec![0.0; m * n];
    let mut r_probe = vec![0.0; m];
    let mut x_try = vec![0.0; n];
    let mut r_try = vec![0.0; m];

    for iteration in 1..=opts.max_iterations {
        for j in 0..n {
            let h = opts.diff_step * x[j].abs().max(1.0);
            let saved = x[j];
            x[j] = saved + h;
            residuals(&x, &mut r_probe);
            x[j] = saved;
            for i in 0..m {
                jac[i * n + j] = (r_probe[i] - r[i]) / h;
            }
        }
        // Marquardt scaling by the column norms of J.
        let diag: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| jac[i * n + j] * jac[i * n + j]).sum::<f64>().sqrt().max(1e-300))
            .collect();

        let mut improved = false;
        for _ in 0..60 {
            let rows = m + n;
            let mut a = Vec::with_capacity(rows * n);
            a.extend_from_slice(&jac);
            let mut b: Vec<f64> = r.iter().map(|v| -v).collect();
            let root_mu = mu.sqrt();
            for (j, dj) in diag.iter().enumerate() {
                for k in 0..n {
                    a.push(if j == k { root_mu * dj } else { 0.0 });
                }
                b.push(0.0);
            }
            let step = match lstsq(&a, rows, n, &b) {
                Ok(s) => s.x,
                Err(_) => {
                    mu *= nu;
                    nu *= 2.0;
                    continue;
                }
            };
            for j in 0..n {
                x_try[j] = x[j] + step[j];
            }
            residuals(&x_try, &mut r_try);
            let new_cost = sum_sq(&r_try);
            // Predicted reduction of the linear model.
            let mut predicted = 0.0;
            for i in 0..m {
                let jd: f64 = (0..n).map(|j| jac[i * n + j] * step[j]).sum();
                predicted += r[i] * r[i] - (r[i] + jd) * (r[i] + jd);
            }
            let rho = (cost - new_cost) / predicted;
            if new_cost.is_finite() && predicted > 0.0 && rho > 0.0 {
                let step_norm = step.iter().zip(&x).map(|(d, v)| (d / v.abs().max(1e-300)).abs()).fold(0.0, f64::max);
                let reduction = (cost - new_cost) / cost.max(f64::MIN_POSITIVE);
                x.copy_from_slice(&x_try);
                r.copy_from_slice(&r_try);
                cost = new_cost;
                mu *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                nu = 2.0;
                improved = true;
                if step_norm < opts.x_tol || reduction < opts.f_tol || cost == 0.0 {
                    return Ok(LmReport { x, cost, iterations: iteration });
                }
                break;
            }
            mu *= nu;
            nu *= 2.0;
        }
        if !improved {
            // No damped step reduces the cost: a local minimum to working precision.
            return Ok(LmReport { x, cost, iterations: iteration });
        }
    }
    Err(Error::FitNotConverged {
        iterations: opts.max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fit() {
        let t: Vec<f64> = (0..40).map(|i| 0.1 * f64::from(i)).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 * (-1.3 * t).exp() + 0.2).collect();
        let rep = levenberg_marquardt(
            |p, r| {
                for i in 0..t.len() {
                    r[i] = p[0] * (-p[1] * t[i]).exp() + p[2] - y[i];
                }
            },
            &[1.0, 0.5, 0.0],
            t.len(),
            &LmOptions::default(),
        )
        .unwrap();
        assert!((rep.x[0] - 2.0).abs() < 1e-8);
        assert!((rep.x[1] - 1.3).abs() < 1e-8);
        assert!((rep.x[2] - 0.2).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let rep = levenberg_marquardt(
            |p, r| {
                r[0] = 10.0 * (p[1] - p[0] * p[0]);
                r[1] = 1.0 - p[0];
            },
            &[-1.2, 1.0],
            2,
            &LmOptions::default(),
        )
        .unwrap();
        assert!((rep.x[0] - 1.0).abs() < 1e-8 && (rep.x[1] - 1.0).abs() < 1e-8);
    }
}
