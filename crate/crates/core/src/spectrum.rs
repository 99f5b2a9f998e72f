//! Photon-assisted tunneling rates of a resonator mode coupled to the
//! refrigerator.
//!
//! A mode of angular frequency ω couples through the capacitance fraction α
//! and impedance Z. Tunneling events that absorb a photon (ℓ = +1) relax
//! the mode, those that emit one (ℓ = −1) excite it:
//!
//! ```text
//! Γ₁→₀ = N π α² (Z/R_T) Σ_τ F(τ eV_j + ħω − E_N)
//! Γ₀→₁ = N π α² (Z/R_T) Σ_τ F(τ eV_j − ħω − E_N)
//! ```
//!
//! with N junctions in series, each biased at V_j = V/N. With a driven
//! supporting mode, every term is further weighted by the probability
//! P_k |M_kl|² that the supporting mode supplies ℓ_s = k − l photons.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, HBAR, VON_KLITZING};
use crate::error::ensure;
use crate::junction::{forward_rate_with, rate_integrator, DeviceConfig, JunctionParams};
use crate::quad::Integrator;
use crate::roots::scan_min;
use crate::{Error, Result};

/// A resonator mode as seen by the junctions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Characteristic impedance Z (Ω).
    pub impedance: f64,
    /// Capacitance fraction α.
    pub alpha: f64,
    /// Junction-interaction parameter ρ used for displacement matrix elements.
    pub rho: f64,
}

/// Default interaction parameter ρ = α √(π Z / R_K).
pub fn default_rho(alpha: f64, impedance: f64) -> f64 {
    alpha * (PI * impedance / VON_KLITZING).sqrt()
}

impl ModeParams {
    /// Mode with the default ρ.
    pub fn new(omega: f64, impedance: f64, alpha: f64) -> Self {
        Self {
            omega,
            impedance,
            alpha,
            rho: default_rho(alpha, impedance),
        }
    }

    pub fn with_rho(self, rho: f64) -> Self {
        Self { rho, ..self }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.omega > 0.0 && self.omega.is_finite(), "omega", "must be positive")?;
        ensure(self.impedance > 0.0 && self.impedance.is_finite(), "impedance", "must be positive")?;
        ensure((0.0..=1.0).contains(&self.alpha), "alpha", "must lie in [0, 1]")?;
        ensure(self.rho >= 0.0 && self.rho.is_finite(), "rho", "must be nonnegative")
    }

    /// Photon energy ħω (J).
    pub fn photon_energy(&self) -> f64 {
        HBAR * self.omega
    }
}

/// Photon statistics of the supporting mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonStatistics {
    /// Poissonian, for an externally driven mode.
    Coherent,
    /// Geometric (Bose–Einstein).
    Thermal,
}

/// State of the supporting (rf-driven) mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    pub mean_n: f64,
    pub distribution: PhotonStatistics,
    /// Largest number of supporting-mode photons exchanged per event.
    pub l_max: usize,
    /// Largest Fock state kept in the occupation sums.
    pub fock_cut: usize,
}

/// Required probability mass kept by the Fock truncation.
pub const TRUNCATION_MASS: f64 = 1.0 - 1e-8;

impl DriveState {
    pub fn coherent(mean_n: f64, l_max: usize, fock_cut: usize) -> Self {
        Self {
            mean_n,
            distribution: PhotonStatistics::Coherent,
            l_max,
            fock_cut,
        }
    }

    pub fn thermal(mean_n: f64, l_max: usize, fock_cut: usize) -> Self {
        Self {
            mean_n,
            distribution: PhotonStatistics::Thermal,
            l_max,
            fock_cut,
        }
    }

    /// Coherent drive with a Fock cutoff wide enough for the truncation test.
    pub fn coherent_auto(mean_n: f64, l_max: usize) -> Self {
        let spread = 8.0 * mean_n.sqrt() + 20.0;
        Self::coherent(mean_n, l_max, (mean_n + spread).ceil() as usize + l_max)
    }

    /// Probability mass kept by the truncation.
    pub fn captured_mass(&self) -> f64 {
        (0..=self.fock_cut).map(|k| occupation_prob(k, self)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.mean_n >= 0.0 && self.mean_n.is_finite(), "mean_n", "must be nonnegative")?;
        let captured = self.captured_mass();
        if captured < TRUNCATION_MASS {
            return Err(Error::TruncationInadequate { captured });
        }
        Ok(())
    }
}

/// Excitation (`up`, Γ₀→₁) and relaxation (`down`, Γ₁→₀) rates in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatePair {
    pub up: f64,
    pub down: f64,
}

impl RatePair {
    pub fn new(up: f64, down: f64) -> Self {
        Self { up, down }
    }

    /// Net damping γ = Γ₁→₀ − Γ₀→₁.
    pub fn net(&self) -> f64 {
        self.down - self.up
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            up: self.up * factor,
            down: self.down * factor,
        }
    }
}

impl core::ops::Add for RatePair {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            up: self.up + rhs.up,
            down: self.down + rhs.down,
        }
    }
}

/// Which part of the coupling strength to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Absorption minus emission, the damping rate of the mode.
    Net,
    /// Absorption (relaxation) processes only.
    Absorption,
}

/// Tabulated γ_T(ω) at a fixed operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectralDensity {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        ensure(grid.len() == values.len(), "values", "must match the grid length")?;
        ensure(grid.len() >= 2, "grid", "needs at least two points")?;
        ensure(grid[0] > 0.0, "grid", "must be positive")?;
        ensure(grid.windows(2).all(|w| w[1] > w[0]), "grid", "must be strictly increasing")?;
        ensure(values.iter().all(|v| *v >= 0.0 && v.is_finite()), "values", "must be finite and nonnegative")?;
        Ok(Self { grid, values })
    }

    /// Same spectrum with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// |M_kl|² for the displaced Fock basis:
/// e^(−ρ²) ρ^(2|k−l|) (m!/M!) [L_m^(|k−l|)(ρ²)]², m = min(k,l), M = max(k,l).
pub fn fock_matrix_sq(k: usize, l: usize, rho: f64) -> f64 {
    let (m, big) = if k <= l { (k, l) } else { (l, k) };
    let j = big - m;
    let x = rho * rho;
    if x == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let (lag, lag_log_scale) = laguerre_scaled(m, j as f64, x);
    if big <= 50 {
        let mut ratio = 1.0;
        for i in (m + 1)..=big {
            ratio /= i as f64;
        }
        let v = (-x).exp() * x.powi(j as i32) * ratio * lag * lag;
        return v * (2.0 * lag_log_scale).exp();
    }
    if lag == 0.0 {
        return 0.0;
    }
    let log_ratio: f64 = -((m + 1)..=big).map(|i| (i as f64).ln()).sum::<f64>();
    let log_v = -x + j as f64 * x.ln() + log_ratio + 2.0 * (lag.abs().ln() + lag_log_scale);
    log_v.exp()
}

/// Generalized Laguerre polynomial L_n^(a)(x) by forward recurrence,
/// returned as (mantissa, natural-log scale).
fn laguerre_scaled(n: usize, a: f64, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    if n == 0 {
        return (prev, 0.0);
    }
    let mut cur = 1.0 + a - x;
    let mut log_scale = 0.0;
    for i in 1..n {
        let fi = i as f64;
        let next = ((2.0 * fi + 1.0 + a - x) * cur - (fi + a) * prev) / (fi + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e200 {
            cur *= 1e-200;
            prev *= 1e-200;
            log_scale += 200.0 * core::f64::consts::LN_10;
        }
    }
    (cur, log_scale)
}

/// Probability of the k-th Fock state of the supporting mode.
pub fn occupation_prob(k: usize, d: &DriveState) -> f64 {
    let n = d.mean_n;
    if n == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    match d.distribution {
        PhotonStatistics::Coherent => (kf * n.ln() - n - libm::lgamma(kf + 1.0)).exp(),
        PhotonStatistics::Thermal => (kf * (n / (1.0 + n)).ln() - n.ln_1p()).exp(),
    }
}

/// Weight W(ℓ_s) = Σ_k P_k |M_{k,k−ℓ_s}|² for ℓ_s = −l_max..=l_max,
/// returned in that order.
pub fn supporting_weights(rho: f64, d: &DriveState) -> Vec<f64> {
    let l_max = d.l_max as isize;
    let probs: Vec<f64> = (0..=d.fock_cut).map(|k| occupation_prob(k, d)).collect();
    (-l_max..=l_max)
        .map(|ls| {
            probs
                .iter()
                .enumerate()
                .filter_map(|(k, &pk)| {
                    let l = k as isize - ls;
                    (l >= 0 && pk > 0.0).then(|| pk * fock_matrix_sq(k, l as usize, rho))
                })
                .sum()
        })
        .collect()
}

fn coupling_prefactor(mode: &ModeParams, j: &JunctionParams, dev: &DeviceConfig) -> f64 {
    f64::from(dev.junctions) * PI * mode.alpha * mode.alpha * mode.impedance / j.r_t
}

/// Rates with the supporting mode supplying energy `shift` per term,
/// each term weighted.
fn weighted_rates(
    v: f64,
    mode: &ModeParams,
    terms: &[(f64, f64)],
    j: &JunctionParams,
    dev: &DeviceConfig,
    integrator: &Integrator,
) -> Result<RatePair> {
    let ev = ELEMENTARY_CHARGE * dev.junction_bias(v);
    let photon = mode.photon_energy();
    let mut rates = RatePair::default();
    for &(shift, weight) in terms {
        if weight == 0.0 {
            continue;
        }
        for tau in [1.0, -1.0] {
            let base = tau * ev + shift - dev.charging_energy;
            rates.down += weight * forward_rate_with(base + photon, j, integrator)?;
            rates.up += weight * forward_rate_with(base - photon, j, integrator)?;
        }
    }
    Ok(rates.scaled(coupling_prefactor(mode, j, dev)))
}

fn validate_all(mode: &ModeParams, j: &JunctionParams, dev: &DeviceConfig) -> Result<()> {
    mode.validate()?;
    j.validate()?;
    dev.validate()
}

/// Directed transition rates of `mode` at device bias `v` (volts), without
/// a supporting drive.
pub fn transition_rates(v: f64, mode: &ModeParams, j: &JunctionParams, dev: &DeviceConfig) -> Result<RatePair> {
    validate_all(mode, j, dev)?;
    weighted_rates(v, mode, &[(0.0, 1.0)], j, dev, &rate_integrator())
}

/// Net coupling strength γ_T at device bias `v`.
pub fn gamma_dc(v: f64, mode: &ModeParams, j: &JunctionParams, dev: &DeviceConfig) -> Result<f64> {
    transition_rates(v, mode, j, dev).map(|r| r.net())
}

/// Directed rates of the primary mode with a driven supporting mode.
pub fn rf_rates(
    v: f64,
    mode_p: &ModeParams,
    mode_s: &ModeParams,
    d: &DriveState,
    j: &JunctionParams,
    dev: &DeviceConfig,
) -> Result<RatePair> {
    validate_all(mode_p, j, dev)?;
    mode_s.validate()?;
    d.validate()?;
    let weights = supporting_weights(mode_s.rho, d);
    let l_max = d.l_max as isize;
    let photon_s = mode_s.photon_energy();
    let terms: Vec<(f64, f64)> = (-l_max..=l_max)
        .zip(weights)
        .map(|(ls, w)| (ls as f64 * photon_s, w))
        .collect();
    weighted_rates(v, mode_p, &terms, j, dev, &rate_integrator())
}

/// Multiphoton coupling strength γ_T,p of the primary mode.
pub fn gamma_rf(
    v: f64,
    mode_p: &ModeParams,
    mode_s: &ModeParams,
    d: &DriveState,
    j: &JunctionParams,
    dev: &DeviceConfig,
    kind: Coupling,
) -> Result<f64> {
    let r = rf_rates(v, mode_p, mode_s, d, j, dev)?;
    Ok(match kind {
        Coupling::Net => r.net(),
        Coupling::Absorption => r.down,
    })
}

/// Two-level steady-state excitation probability Γ₀→₁/(Γ₀→₁ + Γ₁→₀).
pub fn steady_p1(r: &RatePair) -> Result<f64> {
    let total = r.up + r.down;
    if total <= 0.0 {
        return Err(Error::UndefinedSteadyState);
    }
    Ok(r.up / total)
}

/// Temperature whose Boltzmann factor reproduces up/down at frequency ω.
pub fn effective_temperature(r: &RatePair, omega: f64) -> Result<f64> {
    if r.down <= 0.0 && r.up <= 0.0 {
        return Err(Error::UndefinedSteadyState);
    }
    if r.up >= r.down {
        return Err(Error::NonPositiveTemperature { up: r.up, down: r.down });
    }
    if r.up == 0.0 {
        return Ok(0.0);
    }
    Ok(HBAR * omega / (BOLTZMANN * (r.down / r.up).ln()))
}

/// Location of the minimum effective temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalBias {
    /// Device bias (V).
    pub bias: f64,
    /// Bias across one junction (V).
    pub junction_bias: f64,
    /// Effective temperature reached (K).
    pub t_eff: f64,
}

/// Upper end of bias searches: 2Δ/e per junction.
pub fn search_limit(j: &JunctionParams, dev: &DeviceConfig) -> f64 {
    f64::from(dev.junctions) * 2.0 * j.delta / ELEMENTARY_CHARGE
}

const SEARCH_SAMPLES: usize = 201;

/// Bias minimizing the effective temperature, by a grid scan on
/// [0, 2Δ/e] per junction refined with golden-section search.
pub fn optimal_bias(mode: &ModeParams, j: &JunctionParams, dev: &DeviceConfig) -> Result<OptimalBias> {
    validate_all(mode, j, dev)?;
    let hi = search_limit(j, dev);
    let t_eff = |v: f64| {
        transition_rates(v, mode, j, dev)
            .and_then(|r| effective_temperature(&r, mode.omega))
            .unwrap_or(f64::INFINITY)
    };
    let (bias, t) = scan_min(t_eff, 0.0, hi, SEARCH_SAMPLES, 1e-10 * hi)?;
    Ok(OptimalBias {
        bias,
        junction_bias: dev.junction_bias(bias),
        t_eff: t,
    })
}

/// Switching figure of merit: the peak net damping over the subgap-to-gap
/// bias range against the zero-bias damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnOffRatio {
    /// Device bias at the damping peak (V).
    pub bias_on: f64,
    pub gamma_on: f64,
    pub gamma_off: f64,
    pub ratio: f64,
}

pub fn on_off_ratio(mode: &ModeParams, j: &JunctionParams, dev: &DeviceConfig) -> Result<OnOffRatio> {
    validate_all(mode, j, dev)?;
    let hi = search_limit(j, dev);
    let neg_gamma = |v: f64| gamma_dc(v, mode, j, dev).map(|g| -g).unwrap_or(f64::INFINITY);
    let (bias_on, neg) = scan_min(neg_gamma, 0.0, hi, SEARCH_SAMPLES, 1e-10 * hi)?;
    let gamma_off = gamma_dc(0.0, mode, j, dev)?;
    let gamma_on = -neg;
    Ok(OnOffRatio {
        bias_on,
        gamma_on,
        gamma_off,
        ratio: gamma_on / gamma_off,
    })
}

/// γ_T(ω) on `grid` at device bias `v`, holding the template's Z and α.
pub fn tabulate_spectrum(
    v: f64,
    grid: &[f64],
    mode_template: &ModeParams,
    j: &JunctionParams,
    dev: &DeviceConfig,
) -> Result<SpectralDensity> {
    ensure(!grid.is_empty() && grid[0] > 0.0, "grid", "must be positive")?;
    ensure(grid.windows(2).all(|w| w[1] > w[0]), "grid", "must be strictly increasing")?;
    let values = grid
        .iter()
        .map(|&w| gamma_dc(v, &mode_template.with_omega(w), j, dev).map(|g| g.max(0.0)))
        .collect::<Result<Vec<f64>>>()?;
    SpectralDensity::new(grid.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ghz_to_angular, ghz_to_joule};

    fn junction(dynes: f64, temp_n: f64) -> JunctionParams {
        JunctionParams::new(ghz_to_joule(50.0), dynes, 1e4, temp_n).unwrap()
    }

    #[test]
    fn vacuum_overlap_and_identity() {
        assert!((fock_matrix_sq(0, 0, 0.8) - (-0.64_f64).exp()).abs() < 1e-15);
        for k in 0..5 {
            for l in 0..5 {
                let expected = if k == l { 1.0 } else { 0.0 };
                assert_eq!(fock_matrix_sq(k, l, 0.0), expected);
            }
        }
        assert_eq!(fock_matrix_sq(2, 7, 0.4), fock_matrix_sq(7, 2, 0.4));
    }

    #[test]
    fn log_domain_agrees_with_direct_at_the_switch() {
        // M = 50 uses the direct product, M = 51 the log form; neighbours
        // should vary smoothly.
        let a = fock_matrix_sq(40, 50, 0.9);
        let b = fock_matrix_sq(40, 51, 0.9);
        let c = fock_matrix_sq(40, 49, 0.9);
        assert!(a > 0.0 && b > 0.0 && c > 0.0);
        assert!(b < 10.0 * a && a < 10.0 * c);
    }

    #[test]
    fn occupation_examples() {
        let vac = DriveState::coherent(0.0, 2, 10);
        assert_eq!(occupation_prob(0, &vac), 1.0);
        assert_eq!(occupation_prob(3, &vac), 0.0);
        let th = DriveState::thermal(1.0, 2, 60);
        assert!((occupation_prob(0, &th) - 0.5).abs() < 1e-15);
        let coh = DriveState::coherent(2.0, 2, 40);
        assert!((occupation_prob(2, &coh) - 2.0 * (-2.0_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn truncation_guard() {
        let d = DriveState::coherent(30.0, 3, 20);
        assert!(matches!(d.validate(), Err(Error::TruncationInadequate { .. })));
        assert!(DriveState::coherent_auto(30.0, 3).validate().is_ok());
    }

    #[test]
    fn steady_p1_examples() {
        assert_eq!(steady_p1(&RatePair::new(0.0, 3.0)).unwrap(), 0.0);
        assert_eq!(steady_p1(&RatePair::new(2.0, 2.0)).unwrap(), 0.5);
        let e = core::f64::consts::E;
        let p = steady_p1(&RatePair::new(1.0 / e, 1.0)).unwrap();
        assert!((p - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert_eq!(steady_p1(&RatePair::new(0.0, 0.0)), Err(Error::UndefinedSteadyState));
    }

    #[test]
    fn effective_temperature_unit_log() {
        let omega = ghz_to_angular(5.0);
        let r = RatePair::new(1.0, core::f64::consts::E);
        let t = effective_temperature(&r, omega).unwrap();
        assert!((t - HBAR * omega / BOLTZMANN).abs() < 1e-15);
        assert!(matches!(
            effective_temperature(&RatePair::new(2.0, 1.0), omega),
            Err(Error::NonPositiveTemperature { .. })
        ));
    }

    #[test]
    fn zero_bias_zero_temperature_is_dark() {
        let j = junction(0.0, 0.0);
        let mode = ModeParams::new(ghz_to_angular(10.0), 50.0, 0.3);
        let r = transition_rates(0.0, &mode, &j, &DeviceConfig::sinis()).unwrap();
        assert_eq!(r, RatePair::new(0.0, 0.0));
    }

    #[test]
    fn halving_resistance_doubles_damping() {
        let j = junction(1e-4, 0.1);
        let half = JunctionParams { r_t: j.r_t / 2.0, ..j };
        let mode = ModeParams::new(ghz_to_angular(10.0), 50.0, 0.3);
        let dev = DeviceConfig::sinis();
        let v = 1.5 * j.delta / ELEMENTARY_CHARGE;
        let a = gamma_dc(v, &mode, &j, &dev).unwrap();
        let b = gamma_dc(v, &mode, &half, &dev).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tabulate_shape_contract() {
        let j = junction(0.0, 0.0);
        let mode = ModeParams::new(ghz_to_angular(10.0), 50.0, 0.3);
        let grid: Vec<f64> = (1..=7).map(|i| ghz_to_angular(i as f64)).collect();
        let s = tabulate_spectrum(0.0, &grid, &mode, &j, &DeviceConfig::sinis()).unwrap();
        assert_eq!(s.values.len(), grid.len());
        assert!(s.values.iter().all(|v| *v == 0.0));
        assert!(tabulate_spectrum(0.0, &[2.0, 1.0], &mode, &j, &DeviceConfig::sinis()).is_err());
    }
}
