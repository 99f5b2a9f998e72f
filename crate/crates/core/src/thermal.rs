//! Photonic heat transport between two normal-metal islands.
//!
//! Island A exchanges heat with island B through a single quantum-limited
//! channel and with the phonon bath at T₀ through electron–phonon coupling:
//!
//! ```text
//! 0 = (πk_B²/12ħ)(T_B² − T_A²) + ΣΩ(T₀⁵ − T_A⁵) + P
//! ```

use core::f64::consts::PI;

// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::ensure;
use crate::roots::newton_bisect;
use crate::Result;

/// Quantum of thermal conductance π k_B² T/(6ħ) in W/K.
pub fn g_quantum(t: f64) -> f64 {
    PI * BOLTZMANN * BOLTZMANN * t / (6.0 * HBAR)
}

/// Linear response dT_A/dT_B = 1/(1 + a T₀³).
pub fn differential_response(t0: f64, a: f64) -> f64 {
    1.0 / (1.0 + a * t0 * t0 * t0)
}

const RADIATIVE: f64 = PI * BOLTZMANN * BOLTZMANN / (12.0 * HBAR);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalNetwork {
    /// Phonon bath temperature T₀ (K).
    pub t0: f64,
    /// Constant heat load on island A (W).
    pub p_const: f64,
    /// Electron–phonon constant Σ (W m⁻³ K⁻⁵).
    pub ep_sigma: f64,
    /// Island volume Ω (m³).
    pub volume: f64,
}

impl ThermalNetwork {
    /// Network whose linear response has coefficient `a` (K⁻³).
    pub fn from_a_coeff(a: f64, t0: f64, p_const: f64, volume: f64) -> Self {
        Self {
            t0,
            p_const,
            ep_sigma: a * PI * BOLTZMANN * BOLTZMANN / (30.0 * HBAR * volume),
            volume,
        }
    }

    /// a = 30ħΣΩ/(πk_B²), the ratio of electron–phonon to photonic
    /// conductance divided by T₀³.
    pub fn a_coeff(&self) -> f64 {
        30.0 * HBAR * self.ep_sigma * self.volume / (PI * BOLTZMANN * BOLTZMANN)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.t0 > 0.0 && self.t0.is_finite(), "t0", "must be positive")?;
        ensure(self.p_const >= 0.0 && self.p_const.is_finite(), "p_const", "must be nonnegative")?;
        ensure(self.ep_sigma >= 0.0 && self.ep_sigma.is_finite(), "ep_sigma", "must be nonnegative")?;
        ensure(self.volume >= 0.0 && self.volume.is_finite(), "volume", "must be nonnegative")
    }

    /// Net heat flow into island A at temperature `t_a` (W).
    pub fn heat_balance(&self, t_a: f64, t_b: f64) -> f64 {
        let so = self.ep_sigma * self.volume;
        RADIATIVE * (t_b * t_b - t_a * t_a) + so * (self.t0.powi(5) - t_a.powi(5)) + self.p_const
    }
}

/// Temperature of island A for island B held at `t_b`.
pub fn steady_state(net: &ThermalNetwork, t_b: f64) -> Result<f64> {
    net.validate()?;
    ensure(t_b > 0.0 && t_b.is_finite(), "t_b", "must be positive")?;
    let so = net.ep_sigma * net.volume;
    let f = |t: f64| {
        (
            net.heat_balance(t, t_b),
            -2.0 * RADIATIVE * t - 5.0 * so * t.powi(4),
        )
    };
    // The balance decreases monotonically from a nonnegative value at 0.
    let mut hi = 2.0 * t_b.max(net.t0);
    while net.heat_balance(hi, t_b) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(crate::Error::BracketingFailure);
        }
    }
    newton_bisect(f, 0.0, hi)
}
