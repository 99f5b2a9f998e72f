//! NIS junction: Dynes-broadened BCS density of states, Fermi occupation,
//! and the normalized forward tunneling rate
//!
//! ```text
//! F(E) = (1/h) ∫ dε n_S(ε) f(ε − E) [1 − f(ε)]
//! ```
//!
//! which counts tunneling events that deliver energy `E` to the
//! quasiparticle. `F` carries units of 1/s; the resistance and coupling
//! prefactors are applied in [`crate::spectrum`].

use alloc::vec::Vec;

use num_complex::Complex64;
// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::{BOLTZMANN, PLANCK};
use crate::error::ensure;
use crate::quad::Integrator;
use crate::Result;

/// Physical identity of one NIS junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    /// Superconducting gap Δ (J).
    pub delta: f64,
    /// Dynes parameter γ_D.
    pub dynes: f64,
    /// Tunneling resistance R_T (Ω).
    pub r_t: f64,
    /// Normal-metal electron temperature T_N (K).
    pub temp_n: f64,
}

impl JunctionParams {
    pub fn new(delta: f64, dynes: f64, r_t: f64, temp_n: f64) -> Result<Self> {
        let p = Self {
            delta,
            dynes,
            r_t,
            temp_n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.delta > 0.0 && self.delta.is_finite(), "delta", "must be positive")?;
        ensure((0.0..1.0).contains(&self.dynes), "dynes", "must lie in [0, 1)")?;
        ensure(self.r_t > 0.0 && self.r_t.is_finite(), "r_t", "must be positive")?;
        ensure(self.temp_n >= 0.0 && self.temp_n.is_finite(), "temp_n", "must be nonnegative")
    }

    /// Thermal energy k_B T_N (J).
    pub fn thermal_energy(&self) -> f64 {
        BOLTZMANN * self.temp_n
    }
}

/// Circuit-level configuration of the refrigerator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceConfig {
    /// 1 for a single NIS junction, 2 for a SINIS structure.
    pub junctions: u8,
    /// Island charging energy E_N (J).
    pub charging_energy: f64,
}

impl DeviceConfig {
    pub fn sinis() -> Self {
        Self {
            junctions: 2,
            charging_energy: 0.0,
        }
    }

    pub fn nis() -> Self {
        Self {
            junctions: 1,
            charging_energy: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(matches!(self.junctions, 1 | 2), "junctions", "must be 1 or 2")?;
        ensure(
            self.charging_energy >= 0.0 && self.charging_energy.is_finite(),
            "charging_energy",
            "must be nonnegative",
        )
    }

    /// Bias across a single junction for a device bias `v`; the bias splits
    /// evenly in a SINIS structure.
    pub fn junction_bias(&self, v: f64) -> f64 {
        v / f64::from(self.junctions)
    }
}

/// Principal square root without the precision loss of the polar form,
/// which matters for the subgap tail where Re ≪ Im.
pub(crate) fn csqrt(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if a == 0.0 && b == 0.0 {
        return Complex64::new(0.0, b);
    }
    let t = ((a.abs() + a.hypot(b)) * 0.5).sqrt();
    if a >= 0.0 {
        Complex64::new(t, b / (2.0 * t))
    } else {
        Complex64::new(b.abs() / (2.0 * t), t.copysign(b))
    }
}

/// Density of states in units of the normal-state value, at reduced energy
/// `x = ε/Δ`.
pub fn dos_reduced(x: f64, dynes: f64) -> f64 {
    let z = Complex64::new(x, dynes);
    let s = csqrt(z * z - 1.0);
    let norm = s.norm_sqr();
    if norm == 0.0 {
        return f64::INFINITY;
    }
    ((z.re * s.re + z.im * s.im) / norm).abs()
}

/// Dynes density of states n_S(ε) = |Re[(ε + iγ_DΔ)/√((ε + iγ_DΔ)² − Δ²)]|.
pub fn dos(eps: f64, p: &JunctionParams) -> f64 {
    dos_reduced(eps / p.delta, p.dynes)
}

/// Logistic 1/(1 + e^(−y)), evaluated without overflow.
pub(crate) fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let q = y.exp();
        q / (1.0 + q)
    }
}

/// Fermi–Dirac occupation 1/(e^(E/k_B T) + 1); a step with f(0) = 1/2 at T = 0.
pub fn fermi(e: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if e < 0.0 {
            1.0
        } else if e > 0.0 {
            0.0
        } else {
            0.5
        };
    }
    logistic(-e / (BOLTZMANN * t))
}

/// Window half-width beyond the Fermi edges, in units of k_B T_N.
const THERMAL_WINDOW: f64 = 40.0;

/// Normalized forward tunneling rate F(E) in 1/s.
pub fn forward_rate(e: f64, p: &JunctionParams) -> Result<f64> {
    forward_rate_with(e, p, &rate_integrator())
}

pub(crate) fn rate_integrator() -> Integrator {
    Integrator::new(0.0, 1e-11).with_max_intervals(6000)
}

/// [`forward_rate`] with explicit quadrature settings.
pub fn forward_rate_with(e: f64, p: &JunctionParams, integrator: &Integrator) -> Result<f64> {
    let scale = p.delta / PLANCK;
    if p.temp_n == 0.0 {
        return Ok(scale * zero_temperature_reduced(e / p.delta, p.dynes));
    }
    let xe = e / p.delta;
    let beta = p.delta / p.thermal_energy();
    let width = THERMAL_WINDOW / beta;
    let lo = xe.min(0.0) - width;
    let hi = xe.max(0.0) + width;

    let mut points: Vec<f64> = Vec::with_capacity(6);
    points.push(lo);
    for x in [-1.0, 0.0, xe, 1.0] {
        if x > lo && x < hi {
            points.push(x);
        }
    }
    points.push(hi);
    points.sort_by(|a, b| a.total_cmp(b));
    points.dedup();

    // Near a gap edge x = ±1 the substitution x = edge ± u² removes the
    // inverse square-root divergence of the density of states.
    #[derive(Clone, Copy)]
    enum Coord {
        Plain,
        Above(f64),
        Below(f64),
    }
    let mut segments = Vec::with_capacity(points.len());
    let mut coords = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.abs() == 1.0 {
            segments.push((0.0, (b - a).sqrt()));
            coords.push(Coord::Above(a));
        } else if b.abs() == 1.0 {
            segments.push((0.0, (b - a).sqrt()));
            coords.push(Coord::Below(b));
        } else {
            segments.push((a, b));
            coords.push(Coord::Plain);
        }
    }

    let dynes = p.dynes;
    let kernel = |x: f64| dos_reduced(x, dynes) * logistic(-(x - xe) * beta) * logistic(x * beta);
    let est = integrator.integrate_segments(
        |i, t| match coords[i] {
            Coord::Plain => kernel(t),
            Coord::Above(edge) => {
                if t == 0.0 {
                    0.0
                } else {
                    2.0 * t * kernel(edge + t * t)
                }
            }
            Coord::Below(edge) => {
                if t == 0.0 {
                    0.0
                } else {
                    2.0 * t * kernel(edge - t * t)
                }
            }
        },
        &segments,
    )?;
    Ok(scale * est.value.max(0.0))
}

/// h·F(E)/Δ at T_N = 0, where the Fermi factors restrict the integral to
/// 0 < ε < E and the density of states has the antiderivative
/// Re √((ε + iγ_DΔ)² − Δ²).
fn zero_temperature_reduced(x: f64, dynes: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = Complex64::new(x, dynes);
    csqrt(z * z - 1.0).re.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ghz_to_joule, micro_ev_to_joule};

    fn junction(dynes: f64, temp_n: f64) -> JunctionParams {
        JunctionParams::new(ghz_to_joule(50.0), dynes, 1e4, temp_n).unwrap()
    }

    #[test]
    fn dos_at_zero_energy() {
        let g = 1e-4;
        let expected = g / (1.0 + g * g).sqrt();
        assert!((dos_reduced(0.0, g) - expected).abs() < 1e-18);
    }

    #[test]
    fn dos_far_above_gap() {
        let v = dos_reduced(10.0, 0.0);
        assert!((v - 10.0 / 99.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn dos_is_even_and_floors_at_subgap_value() {
        let g = 1e-3;
        for i in 0..200 {
            let x = -3.0 + 0.0301 * i as f64;
            assert_eq!(dos_reduced(x, g), dos_reduced(-x, g));
            assert!(dos_reduced(x, g) >= g / (1.0 + g * g).sqrt() - 1e-12);
        }
        assert!((dos_reduced(1e3, g) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fermi_limits() {
        assert_eq!(fermi(0.0, 0.1), 0.5);
        assert_eq!(fermi(f64::NEG_INFINITY, 0.1), 1.0);
        assert_eq!(fermi(f64::INFINITY, 0.1), 0.0);
        assert_eq!(fermi(-1e-25, 0.0), 1.0);
        assert_eq!(fermi(1e-25, 0.0), 0.0);
        assert_eq!(fermi(0.0, 0.0), 0.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(JunctionParams::new(-1.0, 0.0, 1.0, 0.0).is_err());
        assert!(JunctionParams::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(JunctionParams::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(JunctionParams::new(1.0, 0.0, 1.0, -0.1).is_err());
        assert!(DeviceConfig { junctions: 3, charging_energy: 0.0 }.validate().is_err());
    }

    #[test]
    fn zero_temperature_gap() {
        let p = junction(0.0, 0.0);
        assert_eq!(forward_rate(0.5 * p.delta, &p).unwrap(), 0.0);
        let f2 = forward_rate(2.0 * p.delta, &p).unwrap();
        let expected = 3.0_f64.sqrt() * p.delta / PLANCK;
        assert!((f2 / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn low_temperature_quadrature_approaches_closed_form() {
        // At k_B T ≪ Δ the quadrature path should reproduce the T = 0
        // antiderivative well above the gap.
        let cold = JunctionParams::new(micro_ev_to_joule(200.0), 1e-4, 1e4, 0.01).unwrap();
        let zero = JunctionParams { temp_n: 0.0, ..cold };
        let e = 2.5 * cold.delta;
        let a = forward_rate(e, &cold).unwrap();
        let b = forward_rate(e, &zero).unwrap();
        assert!((a / b - 1.0).abs() < 1e-4, "{a} vs {b}");
    }

    #[test]
    fn detailed_balance_at_fifty_millikelvin() {
        let p = junction(1e-4, 0.05);
        let e = 0.5 * p.delta;
        let forward = forward_rate(e, &p).unwrap();
        let backward = forward_rate(-e, &p).unwrap();
        let boltz = (-e / p.thermal_energy()).exp();
        assert!((backward / (boltz * forward) - 1.0).abs() < 1e-8);
    }
}
