//! Adaptive Dormand–Prince 5(4) integrator for y' = f(t, y).

use alloc::vec;
use alloc::vec::Vec;

// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights equal the last row of A; E is (fifth − fourth).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl Dopri5 {
    /// Advances `y` from `t0` to `t1`. `h` carries the step-size guess
    /// between calls (0 picks one). `after_step` sees every accepted state
    /// and may modify it or abort.
    pub fn advance<F, G>(&self, mut f: F, t0: f64, y: &mut [f64], t1: f64, h: &mut f64, mut after_step: G) -> Result<usize>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        G: FnMut(f64, &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(0);
        }
        let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
        let mut stage = vec![0.0; n];
        let mut y5 = vec![0.0; n];
        let mut t = t0;
        if *h <= 0.0 || !h.is_finite() {
            f(t, y, &mut k[0]);
            let rms = |v: &[f64]| {
                let s: f64 = v
                    .iter()
                    .zip(y.iter())
                    .map(|(vi, yi)| (vi / (self.atol + self.rtol * yi.abs())).powi(2))
                    .sum();
                (s / n as f64).sqrt()
            };
            let (d0, d1) = (rms(y), rms(&k[0]));
            *h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { (0.01 * d0 / d1).min(span) };
        }
        let mut steps = 0;
        while t < t1 {
            if steps >= self.max_steps {
                return Err(Error::StepSizeFailure { t });
            }
            let last = t + *h >= t1 || t1 - (t + *h) < 1e-12 * span;
            let step = if last { t1 - t } else { *h };
            if step <= 1e-14 * t.abs().max(span) {
                return Err(Error::StepSizeFailure { t });
            }
            f(t, y, &mut k[0]);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    stage[i] = acc;
                }
                f(t + C[s] * step, &stage, &mut k[s]);
            }
            let mut err = 0.0;
            for i in 0..n {
                let mut acc = y[i];
                let mut e = 0.0;
                for j in 0..6 {
                    acc += step * A[6][j] * k[j][i];
                }
                for (j, kj) in k.iter().enumerate() {
                    e += step * E[j] * kj[i];
                }
                y5[i] = acc;
                let sc = self.atol + self.rtol * y[i].abs().max(acc.abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if err <= 1.0 && err.is_finite() {
                t = if last { t1 } else { t + step };
                y.copy_from_slice(&y5);
                after_step(t, y)?;
                steps += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    *h = step * factor;
                }
            } else {
                let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                *h = step * factor;
            }
        }
        Ok(steps)
    }
}
