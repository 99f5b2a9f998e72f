//! Dense least squares by Householder QR with column equilibration.

use alloc::vec;
use alloc::vec::Vec;

// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Solution of min ‖Ax − b‖₂.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x: Vec<f64>,
    /// ‖Ax − b‖₂ at the solution.
    pub residual_norm: f64,
}

/// Solves the least-squares problem for a row-major `m × n` matrix `a`,
/// `m ≥ n`. Columns are scaled to unit norm first, so bases with very
/// different magnitudes (V, 1, 1/V) are handled without loss.
pub fn lstsq(a: &[f64], m: usize, n: usize, b: &[f64]) -> Result<LstsqSolution> {
    if a.len() != m * n || b.len() != m || m < n || n == 0 {
        return Err(Error::Domain("least squares dimensions"));
    }
    let mut r = a.to_vec();
    let mut scale = vec![0.0; n];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = (0..m).map(|i| r[i * n + j] * r[i * n + j]).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::RankDeficient);
        }
        *s = norm;
        for i in 0..m {
            r[i * n + j] /= norm;
        }
    }
    let mut qtb = b.to_vec();
    for k in 0..n {
        let alpha = {
            let norm = (k..m).map(|i| r[i * n + k] * r[i * n + k]).sum::<f64>().sqrt();
            if r[k * n + k] > 0.0 {
                -norm
            } else {
                norm
            }
        };
        if alpha.abs() <= 1e3 * f64::EPSILON * (m as f64).sqrt() {
            return Err(Error::RankDeficient);
        }
        // Householder vector v = x − αe₁, stored in place below the diagonal.
        let mut v: Vec<f64> = (k..m).map(|i| r[i * n + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * r[i * n + j]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    r[i * n + j] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * qtb[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                qtb[i] -= f * v[i - k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| r[k * n + j] * x[j]).sum();
        x[k] = (qtb[k] - s) / r[k * n + k];
    }
    let residual_norm = qtb[n..].iter().map(|v| v * v).sum::<f64>().sqrt();
    for (xi, s) in x.iter_mut().zip(&scale) {
        *xi /= s;
    }
    Ok(LstsqSolution { x, residual_norm })
}

/// Straight-line fit y = slope·x + intercept with the standard error of the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_err: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let m = x.len();
    if m != y.len() || m < 2 {
        return Err(Error::FitDegenerate("line fit needs at least two points"));
    }
    let mut a = Vec::with_capacity(2 * m);
    for &xi in x {
        a.push(xi);
        a.push(1.0);
    }
    let sol = lstsq(&a, m, 2, y).map_err(|_| Error::FitDegenerate("all abscissae equal"))?;
    let mean = x.iter().sum::<f64>() / m as f64;
    let sxx: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let slope_err = if m > 2 {
        (sol.residual_norm * sol.residual_norm / ((m - 2) as f64 * sxx)).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope: sol.x[0],
        intercept: sol.x[1],
        slope_err,
    })
}
