//! Incoherent photon emission by a strongly biased refrigerator and the
//! calibration of an amplification chain against it.

use alloc::vec::Vec;

use num_complex::Complex64;
// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, HBAR};
use crate::error::ensure;
use crate::junction::{DeviceConfig, JunctionParams};
use crate::linalg::lstsq;
use crate::lm::{levenberg_marquardt, LmOptions};
use crate::spectrum::{transition_rates, ModeParams, RatePair};
use crate::{Error, Result};

/// Resonator capacitively coupled to a transmission line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonSourceParams {
    /// Coupling capacitance C (F).
    pub c_coupling: f64,
    /// Fundamental angular frequency ω₀ (rad/s).
    pub omega0: f64,
    /// Line impedance Z₀ (Ω).
    pub z0: f64,
    /// Resonator length (m).
    pub l_res: f64,
    /// Resonator capacitance per unit length (F/m).
    pub c_per_len: f64,
}

impl PhotonSourceParams {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.c_coupling, "c_coupling"),
            (self.omega0, "omega0"),
            (self.z0, "z0"),
            (self.l_res, "l_res"),
            (self.c_per_len, "c_per_len"),
        ] {
            ensure(v > 0.0 && v.is_finite(), name, "must be positive")?;
        }
        Ok(())
    }

    /// Energy decay rate into the line, γ_tr = 2C²ω₀²Z₀/(L c).
    pub fn coupling_rate(&self) -> f64 {
        2.0 * self.c_coupling.powi(2) * self.omega0.powi(2) * self.z0 / (self.l_res * self.c_per_len)
    }

    /// Capacitance giving the requested coupling rate, other fields fixed.
    pub fn with_coupling_rate(self, gamma_tr: f64) -> Self {
        let c = (gamma_tr * self.l_res * self.c_per_len / (2.0 * self.omega0.powi(2) * self.z0)).sqrt();
        Self { c_coupling: c, ..self }
    }
}

/// Net power into the line, 2C²ħω₀³Z₀/(L c)·(n_res − n_tl).
pub fn output_power(p: &PhotonSourceParams, n_res: f64, n_tl: f64) -> f64 {
    HBAR * p.omega0 * p.coupling_rate() * (n_res - n_tl)
}

/// Bose–Einstein occupation 1/(e^(ħω/k_B T) − 1).
pub fn bose_occupation(t: f64, omega: f64) -> Result<f64> {
    ensure(t > 0.0, "temperature", "must be positive")?;
    ensure(omega > 0.0, "omega", "must be positive")?;
    Ok(1.0 / (HBAR * omega / (BOLTZMANN * t)).exp_m1())
}

/// Temperature with Bose occupation `n` at frequency `omega`.
pub fn temp_from_occupation(n: f64, omega: f64) -> Result<f64> {
    ensure(n > 0.0 && n.is_finite(), "occupation", "must be positive")?;
    ensure(omega > 0.0, "omega", "must be positive")?;
    Ok(HBAR * omega / (BOLTZMANN * (1.0 / n).ln_1p()))
}

/// Steady occupation of a mode between a line (rate γ_tr, occupation n_tr)
/// and the junction environment with directed rates `qcr`.
pub fn resonator_occupation(gamma_tr: f64, n_tr: f64, qcr: RatePair) -> Result<f64> {
    let damping = gamma_tr + qcr.down - qcr.up;
    if damping <= 0.0 {
        return Err(Error::UndefinedSteadyState);
    }
    Ok((gamma_tr * n_tr + qcr.up) / damping)
}

/// Photon-source operating point at one bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcePoint {
    pub n_res: f64,
    /// Temperature equivalent of `n_res` (K).
    pub t_res: f64,
    /// Power into the line (W).
    pub power: f64,
}

/// Composes the junction rates at bias `v` with the line coupling of `src`.
/// `mode` carries the coupling to the junctions; its frequency is taken
/// from `src`.
pub fn source_point(
    v: f64,
    src: &PhotonSourceParams,
    mode: &ModeParams,
    j: &JunctionParams,
    dev: &DeviceConfig,
    n_tl: f64,
) -> Result<SourcePoint> {
    src.validate()?;
    let mode = mode.with_omega(src.omega0);
    let rates = transition_rates(v, &mode, j, dev)?;
    let n_res = resonator_occupation(src.coupling_rate(), n_tl, rates)?;
    Ok(SourcePoint {
        n_res,
        t_res: if n_res > 0.0 { temp_from_occupation(n_res, src.omega0)? } else { 0.0 },
        power: output_power(src, n_res, n_tl),
    })
}

/// Rates and bath occupations entering the transmitted-power model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationParams {
    pub gamma_tr: f64,
    /// Junction damping rate in the high-bias limit.
    pub gamma_t_bar: f64,
    /// Excess-loss rate.
    pub gamma_x: f64,
    /// Effective photon number of the line.
    pub n_tr: f64,
    /// Effective photon number of the excess bath.
    pub n_x: f64,
    pub omega_r: f64,
    /// Gap Δ (J).
    pub delta: f64,
}

impl CalibrationParams {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.gamma_tr, "gamma_tr"),
            (self.gamma_t_bar, "gamma_t_bar"),
            (self.gamma_x, "gamma_x"),
            (self.n_tr, "n_tr"),
            (self.n_x, "n_x"),
            (self.omega_r, "omega_r"),
            (self.delta, "delta"),
        ] {
            ensure(v >= 0.0 && v.is_finite(), name, "must be nonnegative")?;
        }
        Ok(())
    }

    fn total(&self) -> f64 {
        self.gamma_tr + self.gamma_t_bar + self.gamma_x
    }
}

/// High-bias approximation of the power delivered to the line.
pub fn p_tr_model(v: f64, cp: &CalibrationParams) -> Result<f64> {
    cp.validate()?;
    if v == 0.0 || !v.is_finite() {
        return Err(Error::Domain("transmitted-power model needs a nonzero bias"));
    }
    let total = cp.total();
    if total == 0.0 {
        return Ok(0.0);
    }
    let ev = ELEMENTARY_CHARGE * v;
    let prefactor = cp.gamma_tr * cp.gamma_t_bar / total;
    let excess = if cp.gamma_x == 0.0 {
        0.0
    } else {
        cp.gamma_x * (cp.n_x - cp.n_tr) / cp.gamma_t_bar
    };
    let photon = HBAR * cp.omega_r * (excess - cp.n_tr - 0.5);
    let correction = 0.5 * cp.delta * cp.delta / ev * (1.0 + cp.gamma_t_bar / total);
    Ok(prefactor * (ev / 4.0 + photon - correction))
}

/// Coefficients of P_out = aV + b + c/V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// RMS residual (W).
    pub residual: f64,
}

impl PowerFit {
    pub fn eval(&self, v: f64) -> f64 {
        self.a * v + self.b + self.c / v
    }
}

/// Linear least squares in the basis {V, 1, 1/V}.
pub fn fit_output_power(samples: &[(f64, f64)]) -> Result<PowerFit> {
    if samples.iter().any(|(v, p)| *v <= 0.0 || !v.is_finite() || !p.is_finite()) {
        return Err(Error::FitDegenerate("biases must be positive and powers finite"));
    }
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.0).collect();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::FitDegenerate("need three distinct biases"));
    }
    let m = samples.len();
    let mut a = Vec::with_capacity(3 * m);
    let mut b = Vec::with_capacity(m);
    for &(v, p) in samples {
        a.extend_from_slice(&[v, 1.0, 1.0 / v]);
        b.push(p);
    }
    let sol = lstsq(&a, m, 3, &b)?;
    Ok(PowerFit {
        a: sol.x[0],
        b: sol.x[1],
        c: sol.x[2],
        residual: sol.residual_norm / (m as f64).sqrt(),
    })
}

/// Chain gain G = (4a/e)(γ̄_T + γ_tr + γ_x)/(γ̄_T γ_tr).
pub fn gain_from_fit(a: f64, cp: &CalibrationParams) -> Result<f64> {
    cp.validate()?;
    ensure(cp.gamma_t_bar > 0.0, "gamma_t_bar", "must be positive")?;
    ensure(cp.gamma_tr > 0.0, "gamma_tr", "must be positive")?;
    Ok(4.0 * a / ELEMENTARY_CHARGE * cp.total() / (cp.gamma_t_bar * cp.gamma_tr))
}

/// Noise temperature T = P_out(0)/(G k_B Δf).
pub fn noise_temperature(p_out_zero: f64, gain: f64, bandwidth: f64) -> Result<f64> {
    ensure(gain > 0.0 && gain.is_finite(), "gain", "must be positive")?;
    ensure(bandwidth > 0.0 && bandwidth.is_finite(), "bandwidth", "must be positive")?;
    Ok(p_out_zero / (gain * BOLTZMANN * bandwidth))
}

/// Fitted chain calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRecord {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gain: f64,
    pub t_noise: f64,
    pub residual: f64,
}

/// Fit, gain and noise temperature in one pass. `samples` are high-bias
/// (V, P_out) pairs; `p_out_zero` is the output power at zero bias.
pub fn calibrate(samples: &[(f64, f64)], p_out_zero: f64, cp: &CalibrationParams, bandwidth: f64) -> Result<CalibrationRecord> {
    let fit = fit_output_power(samples)?;
    let gain = gain_from_fit(fit.a, cp)?;
    Ok(CalibrationRecord {
        a: fit.a,
        b: fit.b,
        c: fit.c,
        gain,
        t_noise: noise_temperature(p_out_zero, gain, bandwidth)?,
        residual: fit.residual,
    })
}

/// One-port reflection of a resonator with external rate γ_tr and internal
/// rate γ_int:
/// Γ(ω) = [i(ω − ω_r) + (γ_int − γ_tr)/2] / [i(ω − ω_r) + (γ_int + γ_tr)/2].
pub fn reflection(omega: f64, omega_r: f64, gamma_tr: f64, gamma_int: f64) -> Complex64 {
    reflection_detuned(omega - omega_r, gamma_tr, gamma_int)
}

fn reflection_detuned(detuning: f64, gamma_tr: f64, gamma_int: f64) -> Complex64 {
    let num = Complex64::new(0.5 * (gamma_int - gamma_tr), detuning);
    let den = Complex64::new(0.5 * (gamma_int + gamma_tr), detuning);
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionFit {
    pub omega_r: f64,
    pub gamma_tr: f64,
    pub gamma_int: f64,
    /// RMS of |Γ_model − Γ_data|.
    pub residual: f64,
}

/// Fits the one-port model to a trace of (ω, Γ) samples sorted by ω.
pub fn fit_reflection(trace: &[(f64, Complex64)]) -> Result<ReflectionFit> {
    ensure(trace.len() >= 8, "trace", "needs at least eight points")?;
    ensure(trace.windows(2).all(|w| w[1].0 > w[0].0), "trace", "frequencies must increase")?;
    // |Γ − 1|² = γ_tr²/((ω − ω_r)² + κ²/4) with κ = γ_tr + γ_int.
    let depth: Vec<f64> = trace.iter().map(|(_, g)| (g - 1.0).norm_sqr()).collect();
    let (peak_i, peak) = depth
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
    if peak <= 0.0 || peak.is_nan() {
        return Err(Error::LinewidthUnresolved);
    }
    let half = 0.5 * peak;
    let left = (0..peak_i).rev().find(|&i| depth[i] < half);
    let right = ((peak_i + 1)..trace.len()).find(|&i| depth[i] < half);
    let (Some(l), Some(r)) = (left, right) else {
        return Err(Error::LinewidthUnresolved);
    };
    let cross = |i: usize, k: usize| {
        let (x0, y0) = (trace[i].0, depth[i]);
        let (x1, y1) = (trace[k].0, depth[k]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let kappa0 = cross(r - 1, r) - cross(l, l + 1);
    let step = (trace[trace.len() - 1].0 - trace[0].0) / (trace.len() - 1) as f64;
    let span = trace[trace.len() - 1].0 - trace[0].0;
    if r - l < 4 || kappa0 < 2.0 * step {
        return Err(Error::LinewidthUnresolved);
    }
    ensure(span >= 5.0 * kappa0, "trace", "must span at least five linewidths")?;
    let omega0 = trace[peak_i].0;
    let gtr0 = 0.5 * kappa0 * peak.sqrt();
    let gint0 = (kappa0 - gtr0).max(0.05 * kappa0);

    let u: Vec<f64> = trace.iter().map(|(w, _)| (w - omega0) / kappa0).collect();
    let m = 2 * trace.len();
    let report = levenberg_marquardt(
        |x, r| {
            for (i, (ui, (_, g))) in u.iter().zip(trace).enumerate() {
                let model = reflection_detuned(ui - x[0], x[1], x[2]);
                r[2 * i] = model.re - g.re;
                r[2 * i + 1] = model.im - g.im;
            }
        },
        &[0.0, gtr0 / kappa0, gint0 / kappa0],
        m,
        &LmOptions::default(),
    )?;
    let x = report.x;
    Ok(ReflectionFit {
        omega_r: omega0 + x[0] * kappa0,
        gamma_tr: x[1] * kappa0,
        gamma_int: x[2] * kappa0,
        residual: (report.cost / trace.len() as f64).sqrt(),
    })
}
