//! Piecewise interpolation on strictly increasing grids.

use alloc::vec::Vec;

use crate::error::ensure;
use crate::Result;

fn check_grid(x: &[f64], y: &[f64]) -> Result<()> {
    ensure(x.len() == y.len(), "values", "must match the grid length")?;
    ensure(x.len() >= 2, "grid", "needs at least two points")?;
    ensure(x.windows(2).all(|w| w[1] > w[0]), "grid", "must be strictly increasing")
}

/// Index `i` of the cell `[x[i], x[i+1]]` containing `t`, clamped to the grid.
fn cell(x: &[f64], t: f64) -> usize {
    x.partition_point(|&v| v <= t).clamp(1, x.len() - 1) - 1
}

/// Linear interpolation; constant extension beyond the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Linear {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_grid(&x, &y)?;
        Ok(Self { x, y })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = cell(&self.x, t);
        let s = (t - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.y[i] + s * (self.y[i + 1] - self.y[i])
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
/// Preserves monotonicity of the data and never overshoots a local extremum.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_grid(&x, &y)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = alloc::vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
            return Ok(Self { x, y, d });
        }
        for i in 1..n - 1 {
            let (a, b) = (delta[i - 1], delta[i]);
            if a * b > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / a + w2 / b);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Ok(Self { x, y, d })
    }

    pub fn grid(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Value at `t`; `t` outside the grid evaluates the end cubic.
    pub fn eval(&self, t: f64) -> f64 {
        let i = cell(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h * h10 * self.d[i] + h01 * self.y[i + 1] + h * h11 * self.d[i + 1]
    }
}

// One-sided three-point slope, limited to keep the end cell monotone.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        0.0
    } else if del0 * del1 <= 0.0 && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
