//! CODATA 2018 exact SI constants and unit conversions.

use core::f64::consts::TAU;

/// Planck constant h (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant ħ (J s).
pub const HBAR: f64 = PLANCK / TAU;
/// Elementary charge e (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant k_B (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Resistance quantum R_K = h/e² (Ω).
pub const VON_KLITZING: f64 = PLANCK / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);

/// Energy of one microelectronvolt in joules.
pub const MICRO_EV: f64 = ELEMENTARY_CHARGE * 1e-6;

pub fn micro_ev_to_joule(micro_ev: f64) -> f64 {
    micro_ev * MICRO_EV
}

pub fn joule_to_micro_ev(energy: f64) -> f64 {
    energy / MICRO_EV
}

/// Photon energy hf for a frequency in GHz.
pub fn ghz_to_joule(ghz: f64) -> f64 {
    PLANCK * ghz * 1e9
}

/// Angular frequency 2πf for a frequency in GHz.
pub fn ghz_to_angular(ghz: f64) -> f64 {
    TAU * ghz * 1e9
}

pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TAU
}

/// Bias voltage corresponding to an energy (V = E/e).
pub fn joule_to_volt(energy: f64) -> f64 {
    energy / ELEMENTARY_CHARGE
}

