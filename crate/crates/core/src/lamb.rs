//! Cauchy principal values and the broadband Lamb shift
//!
//! ```text
//! ω_L = −PV ∫₀^∞ dω/2π γ(ω) [1/(ω − ω_r) + 1/(ω + ω_r) − 2/ω]
//! ```
//!
//! of a mode coupled to an environment with coupling spectrum γ(ω).

use alloc::vec::Vec;
use core::f64::consts::TAU;

// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::ensure;
use crate::interp::Pchip;
use crate::quad::{Estimate, Integrator};
use crate::spectrum::SpectralDensity;
use crate::{Error, Result};

/// Number of halvings of the excision radius.
const LEVELS: usize = 8;
/// Initial excision radius as a fraction of the distance to the nearer end.
const FIRST_RADIUS: f64 = 1e-2;
/// Accepted disagreement between extrapolation orders, relative to the
/// magnitude of the one-sided integrals.
const PV_REL_TOL: f64 = 1e-7;

/// Principal value of ∫ f over `[lo, hi]` with a simple pole at `pole`.
pub fn pv_integral<F: Fn(f64) -> f64>(f: F, pole: f64, lo: f64, hi: f64) -> Result<Estimate> {
    pv_integral_with_breaks(f, pole, &[lo, hi], &Integrator::default())
}

/// [`pv_integral`] with interior breakpoints (`points[0]` and the last entry
/// are the limits) and explicit quadrature settings.
///
/// The integral outside a symmetric gap of radius ε₀ around the pole is
/// computed directly. The gap is then filled by annuli ε_k < |ω − pole| < ε_(k−1)
/// with ε_k = ε₀ 2^(−k), integrating f(pole + u) + f(pole − u) so the
/// 1/u parts cancel. The partial sums S(ε) = PV + c₁ε + c₃ε³ + … are
/// Richardson-extrapolated to ε = 0.
pub fn pv_integral_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    pole: f64,
    points: &[f64],
    integrator: &Integrator,
) -> Result<Estimate> {
    ensure(points.len() >= 2, "points", "needs both limits")?;
    ensure(points.windows(2).all(|w| w[1] > w[0]), "points", "must be strictly increasing")?;
    let lo = points[0];
    let hi = points[points.len() - 1];
    if !(pole > lo && pole < hi) {
        return Err(Error::PoleOutsideRange { pole });
    }
    let integrator = integrator.with_max_intervals(integrator.max_intervals.max(8 * points.len()));
    let eps0 = FIRST_RADIUS * (pole - lo).min(hi - pole);

    let mut left: Vec<f64> = points.iter().copied().filter(|&p| p < pole - eps0).collect();
    left.push(pole - eps0);
    let mut right = alloc::vec![pole + eps0];
    right.extend(points.iter().copied().filter(|&p| p > pole + eps0));
    let a = integrator.integrate_with_breaks(&f, &left)?;
    let b = integrator.integrate_with_breaks(&f, &right)?;
    let reference = a.value.abs() + b.value.abs();

    let mut partial = [0.0; LEVELS + 1];
    partial[0] = a.value + b.value;
    let mut quad_err = a.abs_err + b.abs_err;
    let mut evaluations = a.evaluations + b.evaluations;
    let paired = |u: f64| f(pole + u) + f(pole - u);
    let mut outer = eps0;
    for k in 1..=LEVELS {
        let inner = outer * 0.5;
        let mut breaks = alloc::vec![inner];
        let mut interior: Vec<f64> = points
            .iter()
            .map(|p| (p - pole).abs())
            .filter(|&u| u > inner && u < outer)
            .collect();
        interior.sort_by(|x, y| x.total_cmp(y));
        breaks.extend(interior);
        breaks.push(outer);
        let ring = Integrator {
            abs_tol: integrator.abs_tol.max(integrator.rel_tol * reference * 1e-3),
            ..integrator
        }
        .integrate_with_breaks(paired, &breaks)?;
        partial[k] = partial[k - 1] + ring.value;
        quad_err += ring.abs_err;
        evaluations += ring.evaluations;
        outer = inner;
    }

    // table[j] holds column j of the Richardson tableau for the latest two levels.
    let mut prev = [0.0; 3];
    let mut cur = [0.0; 3];
    for (k, &s) in partial.iter().enumerate() {
        cur[0] = s;
        for j in 1..3.min(k + 1) {
            let w = (1u32 << (2 * j - 1)) as f64;
            cur[j] = (w * cur[j - 1] - prev[j - 1]) / (w - 1.0);
        }
        prev = cur;
    }
    let value = cur[2];
    let extrapolation_err = (cur[2] - cur[1]).abs();
    let abs_err = extrapolation_err + quad_err;
    if !value.is_finite() || extrapolation_err > PV_REL_TOL * reference + integrator.abs_tol {
        return Err(Error::PrincipalValueNotConverged { value, abs_err });
    }
    Ok(Estimate {
        value,
        abs_err,
        evaluations,
    })
}

/// Frequency shift with its estimated numerical error, both in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambResult {
    pub shift: f64,
    pub abs_err: f64,
}

/// Grid coverage required around the mode frequency.
pub const COVERAGE: f64 = 50.0;

/// Default spectrum grid: 4001 log-spaced points on [ω_r/100, 100 ω_r].
pub fn default_grid(omega_r: f64) -> Vec<f64> {
    log_grid(omega_r / 100.0, omega_r * 100.0, 4001)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Lamb shift of a mode at `omega_r` from a tabulated coupling spectrum.
///
/// Between grid points γ is interpolated monotone-cubically. Below the grid
/// it falls linearly to zero, above it continues as the Ohmic line through
/// the last point; both tails are integrated in closed form.
pub fn lamb_shift(s: &SpectralDensity, omega_r: f64) -> Result<LambResult> {
    ensure(omega_r > 0.0 && omega_r.is_finite(), "omega_r", "must be positive")?;
    let grid = &s.grid;
    let (w0, w1) = (grid[0], grid[grid.len() - 1]);
    if w0 > omega_r / COVERAGE || w1 < omega_r * COVERAGE {
        return Err(Error::GridCoverage {
            required_lo: omega_r / COVERAGE,
            required_hi: omega_r * COVERAGE,
        });
    }
    let gamma = Pchip::new(grid.clone(), s.values.clone())?;
    let r = omega_r;
    let integrand = |w: f64| gamma.eval(w) * (1.0 / (w - r) + 1.0 / (w + r) - 2.0 / w);
    let pv = pv_integral_with_breaks(integrand, r, grid, &Integrator::new(0.0, 1e-10))?;

    // For γ = cω the bracket collapses to 2cr²/(ω² − r²).
    let c_low = s.values[0] / w0;
    let c_high = s.values[s.values.len() - 1] / w1;
    let low_tail = c_low * r * ((r - w0) / (r + w0)).ln();
    let high_tail = c_high * r * ((w1 + r) / (w1 - r)).ln();

    Ok(LambResult {
        shift: -(pv.value + low_tail + high_tail) / TAU,
        abs_err: pv.abs_err / TAU,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_interval_simple_pole() {
        let est = pv_integral(|w| 1.0 / (w - 1.0), 1.0, 0.0, 2.0).unwrap();
        assert!(est.value.abs() < 1e-12, "{est:?}");
    }

    #[test]
    fn shifted_pole_with_constant() {
        let est = pv_integral(|w| w / (w - 1.0), 1.0, 0.0, 2.0).unwrap();
        assert!((est.value - 2.0).abs() < 1e-10, "{est:?}");
    }

    #[test]
    fn asymmetric_interval_log() {
        // PV ∫₀³ dw/(w − 1) = ln 2.
        let est = pv_integral(|w| 1.0 / (w - 1.0), 1.0, 0.0, 3.0).unwrap();
        assert!((est.value - 2.0_f64.ln()).abs() < 1e-10, "{est:?}");
    }

    #[test]
    fn pole_outside_range() {
        assert!(matches!(
            pv_integral(|w| w, 3.0, 0.0, 2.0),
            Err(Error::PoleOutsideRange { .. })
        ));
    }

    #[test]
    fn coverage_is_enforced() {
        let grid = log_grid(1.0, 100.0, 50);
        let s = SpectralDensity::new(grid.clone(), grid.clone()).unwrap();
        assert!(matches!(lamb_shift(&s, 10.0), Err(Error::GridCoverage { .. })));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.01, 100.0, 5);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[4], 100.0);
        assert!((g[2] - 1.0).abs() < 1e-15);
    }
}
