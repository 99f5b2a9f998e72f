//! Rate-equation evolution of a harmonic mode's Fock populations under a
//! time-dependent dissipative environment.
//!
//! With relaxation rate D and excitation rate U per photon,
//!
//! ```text
//! dp_m/dt = D[(m+1) p_(m+1) − m p_m] + U[m p_(m−1) − (m+1) p_m]
//! ```
//!
//! truncated at `n_cut` with no excitation out of the top level.

use alloc::vec;
use alloc::vec::Vec;

// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::ensure;
use crate::interp::Linear;
use crate::junction::{DeviceConfig, JunctionParams};
use crate::linalg::fit_line;
use crate::ode::Dopri5;
use crate::spectrum::{transition_rates, ModeParams, RatePair};
use crate::{Error, Result};

/// Largest population allowed in the top Fock level.
pub const LEAKAGE_LIMIT: f64 = 1e-6;
/// Default Fock truncation.
pub const DEFAULT_N_CUT: usize = 30;
/// Gaussian edges are cut off this many widths from the flat top.
const EDGE_SIGMAS: f64 = 6.0;

/// Bias-dependent excitation and relaxation rates.
pub trait RateSource {
    fn rates(&self, bias: f64) -> Result<RatePair>;
}

impl<T: RateSource + ?Sized> RateSource for &T {
    fn rates(&self, bias: f64) -> Result<RatePair> {
        (**self).rates(bias)
    }
}

/// Photon-assisted tunneling rates of one mode, evaluated on demand.
/// Each call runs the rate quadratures; tabulate with [`RateTable::tabulate`]
/// before evolving through smooth pulse edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcrEnvironment {
    pub mode: ModeParams,
    pub junction: JunctionParams,
    pub device: DeviceConfig,
}

impl RateSource for QcrEnvironment {
    fn rates(&self, bias: f64) -> Result<RatePair> {
        transition_rates(bias, &self.mode, &self.junction, &self.device)
    }
}

/// Bias-independent rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRates(pub RatePair);

impl RateSource for ConstantRates {
    fn rates(&self, _bias: f64) -> Result<RatePair> {
        Ok(self.0)
    }
}

/// Rates interpolated linearly in bias, held constant beyond the table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    up: Linear,
    down: Linear,
}

impl RateTable {
    pub fn new(bias: Vec<f64>, rates: &[RatePair]) -> Result<Self> {
        Ok(Self {
            up: Linear::new(bias.clone(), rates.iter().map(|r| r.up).collect())?,
            down: Linear::new(bias, rates.iter().map(|r| r.down).collect())?,
        })
    }

    pub fn tabulate<S: RateSource + ?Sized>(source: &S, bias: Vec<f64>) -> Result<Self> {
        let rates = bias.iter().map(|&v| source.rates(v)).collect::<Result<Vec<_>>>()?;
        Self::new(bias, &rates)
    }
}

impl RateSource for RateTable {
    fn rates(&self, bias: f64) -> Result<RatePair> {
        Ok(RatePair::new(self.up.eval(bias), self.down.eval(bias)))
    }
}

/// Additional bath, such as the transmission line, with its own occupation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtraBath {
    pub gamma: f64,
    pub n_th: f64,
}

impl ExtraBath {
    pub fn cold(gamma: f64) -> Self {
        Self { gamma, n_th: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        ensure(self.gamma >= 0.0 && self.gamma.is_finite(), "extra_gamma", "must be nonnegative")?;
        ensure(self.n_th >= 0.0 && self.n_th.is_finite(), "extra_n_th", "must be nonnegative")
    }

    fn totals(&self, r: RatePair) -> RatePair {
        RatePair::new(r.up + self.gamma * self.n_th, r.down + self.gamma * (self.n_th + 1.0))
    }
}

/// Bias pulse with a flat top and optional Gaussian edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSchedule {
    /// Bias outside the pulse (V).
    pub baseline: f64,
    /// Bias on the flat top (V).
    pub amplitude: f64,
    /// Start of the flat top (s).
    pub start: f64,
    /// Flat-top duration τ (s).
    pub width: f64,
    /// Gaussian edge width σ (s); 0 gives a rectangular pulse.
    pub rise_fall: f64,
}

impl PulseSchedule {
    /// A bias held constant for all time.
    pub fn constant(bias: f64) -> Self {
        Self {
            baseline: bias,
            amplitude: bias,
            start: 0.0,
            width: 0.0,
            rise_fall: 0.0,
        }
    }

    pub fn with_width(self, width: f64) -> Self {
        Self { width, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.width >= 0.0 && self.width.is_finite(), "width", "must be nonnegative")?;
        ensure(self.rise_fall >= 0.0 && self.rise_fall.is_finite(), "rise_fall", "must be nonnegative")?;
        ensure(self.start.is_finite(), "start", "must be finite")?;
        ensure(self.baseline.is_finite() && self.amplitude.is_finite(), "amplitude", "must be finite")
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    fn edge(&self) -> f64 {
        EDGE_SIGMAS * self.rise_fall
    }

    /// Time interval outside of which the bias equals the baseline.
    pub fn support(&self) -> (f64, f64) {
        (self.start - self.edge(), self.end() + self.edge())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let (start, end) = (self.start, self.end());
        if t >= start && t <= end {
            return 1.0;
        }
        let sigma = self.rise_fall;
        if sigma == 0.0 {
            return 0.0;
        }
        let d = if t < start { start - t } else { t - end };
        if d > self.edge() {
            0.0
        } else {
            (-0.5 * (d / sigma).powi(2)).exp()
        }
    }

    pub fn bias(&self, t: f64) -> f64 {
        let e = self.envelope(t);
        if e == 0.0 {
            self.baseline
        } else if e == 1.0 {
            self.amplitude
        } else {
            self.baseline + (self.amplitude - self.baseline) * e
        }
    }

    fn breakpoints(&self) -> [f64; 4] {
        let (lo, hi) = self.support();
        [lo, self.start, self.end(), hi]
    }
}

/// Fock-state populations p_0..=p_n_cut.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderState {
    pub probs: Vec<f64>,
}

impl LadderState {
    pub fn ground(n_cut: usize) -> Self {
        let mut probs = vec![0.0; n_cut + 1];
        probs[0] = 1.0;
        Self { probs }
    }

    pub fn fock(m: usize, n_cut: usize) -> Result<Self> {
        ensure(m < n_cut, "fock", "must lie below the truncation")?;
        let mut probs = vec![0.0; n_cut + 1];
        probs[m] = 1.0;
        Ok(Self { probs })
    }

    /// Truncated and renormalized Bose–Einstein distribution.
    pub fn thermal(mean_n: f64, n_cut: usize) -> Result<Self> {
        ensure(mean_n >= 0.0 && mean_n.is_finite(), "mean_n", "must be nonnegative")?;
        let q = mean_n / (1.0 + mean_n);
        Self::normalized((0..=n_cut).map(|m| q.powi(m as i32)).collect())
    }

    /// Truncated and renormalized Poisson distribution (coherent state).
    pub fn poisson(mean_n: f64, n_cut: usize) -> Result<Self> {
        ensure(mean_n >= 0.0 && mean_n.is_finite(), "mean_n", "must be nonnegative")?;
        if mean_n == 0.0 {
            return Ok(Self::ground(n_cut));
        }
        let ln = mean_n.ln();
        Self::normalized(
            (0..=n_cut)
                .map(|m| (m as f64 * ln - mean_n - libm::lgamma(m as f64 + 1.0)).exp())
                .collect(),
        )
    }

    /// Geometric steady state with ratio up/down of the given total rates.
    pub fn steady(totals: RatePair, n_cut: usize) -> Result<Self> {
        if totals.down <= 0.0 || totals.up >= totals.down {
            return Err(Error::UndefinedSteadyState);
        }
        let q = totals.up / totals.down;
        Self::normalized((0..=n_cut).map(|m| q.powi(m as i32)).collect())
    }

    fn normalized(mut probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let s = Self { probs };
        s.validate()?;
        Ok(s)
    }

    pub fn n_cut(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean_n(&self) -> f64 {
        self.probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }

    /// Signal amplitude proxy √⟨n⟩.
    pub fn amplitude(&self) -> f64 {
        self.mean_n().sqrt()
    }

    pub fn leakage(&self) -> f64 {
        self.probs[self.n_cut()]
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.probs.len() >= 2, "n_cut", "must be at least 1")?;
        ensure(self.probs.iter().all(|p| *p >= 0.0 && p.is_finite()), "probs", "must be nonnegative")?;
        ensure((self.total() - 1.0).abs() <= 1e-9, "probs", "must sum to one")?;
        if self.leakage() > LEAKAGE_LIMIT {
            return Err(Error::Leakage {
                population: self.leakage(),
            });
        }
        Ok(())
    }
}

/// Populations sampled at requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<LadderState>,
}

fn ladder_rhs(totals: RatePair, p: &[f64], dp: &mut [f64]) {
    let n = p.len() - 1;
    let (u, d) = (totals.up, totals.down);
    for m in 0..=n {
        let mf = m as f64;
        let mut v = -d * mf * p[m];
        if m < n {
            v += d * (mf + 1.0) * p[m + 1] - u * (mf + 1.0) * p[m];
        }
        if m > 0 {
            v += u * mf * p[m - 1];
        }
        dp[m] = v;
    }
}

/// Evolves `init` from t = 0 and records the state at each of `times`
/// (nondecreasing, ≥ 0).
pub fn evolve<S: RateSource + ?Sized>(
    init: &LadderState,
    sched: &PulseSchedule,
    env: &S,
    bath: ExtraBath,
    times: &[f64],
) -> Result<Trajectory> {
    init.validate()?;
    sched.validate()?;
    bath.validate()?;
    ensure(times.iter().all(|t| *t >= 0.0 && t.is_finite()), "times", "must be nonnegative")?;
    ensure(times.windows(2).all(|w| w[1] >= w[0]), "times", "must be nondecreasing")?;

    let mut stops: Vec<f64> = sched.breakpoints().iter().copied().filter(|t| *t > 0.0).collect();
    stops.extend_from_slice(times);
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();

    let solver = Dopri5::default();
    let mut y = init.probs.clone();
    let mut t = 0.0;
    let mut h = 0.0;
    let mut memo: Option<(f64, RatePair)> = None;
    let mut failure: Option<Error> = None;
    let mut states = Vec::with_capacity(times.len());
    let mut next_time = 0;

    let record = |t: f64, y: &[f64], states: &mut Vec<LadderState>, next_time: &mut usize| {
        while *next_time < times.len() && times[*next_time] <= t {
            states.push(LadderState { probs: y.to_vec() });
            *next_time += 1;
        }
    };
    record(0.0, &y, &mut states, &mut next_time);

    for &stop in stops.iter().filter(|s| **s > 0.0) {
        // Flat stretches repeat the same bias, so the last rates are reused.
        let rhs = |tt: f64, p: &[f64], dp: &mut [f64]| {
            let bias = sched.bias(tt);
            let r = match memo {
                Some((b, r)) if b == bias => Ok(r),
                _ => env.rates(bias),
            };
            match r {
                Ok(r) => {
                    memo = Some((bias, r));
                    ladder_rhs(bath.totals(r), p, dp);
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    dp.iter_mut().for_each(|v| *v = 0.0);
                }
            }
        };
        solver.advance(rhs, t, &mut y, stop, &mut h, |_, p| {
            for v in p.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let top = p[p.len() - 1];
            if top > LEAKAGE_LIMIT {
                return Err(Error::Leakage { population: top });
            }
            Ok(())
        })?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        t = stop;
        record(t, &y, &mut states, &mut next_time);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// Population left outside the ground state after holding `bias` for `hold`.
pub fn reset_infidelity<S: RateSource + ?Sized>(
    init: &LadderState,
    hold: f64,
    env: &S,
    bias: f64,
    bath: ExtraBath,
) -> Result<f64> {
    ensure(hold > 0.0 && hold.is_finite(), "hold", "must be positive")?;
    let traj = evolve(init, &PulseSchedule::constant(bias), env, bath, &[hold])?;
    Ok((1.0 - traj.states[0].probs[0]).max(0.0))
}

/// Damping rates recovered from a pulse-length sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseExtraction {
    /// Environment damping during the pulse (1/s), excluding the extra bath.
    pub gamma_qcr: f64,
    /// Pulse-induced change of the damping rate, twice the fitted slope.
    pub excess: f64,
    /// Standard error of `excess` and `gamma_qcr`.
    pub excess_err: f64,
    /// Environment damping at the baseline bias.
    pub gamma_off: f64,
    /// Extra-bath damping included in both totals.
    pub gamma_extra: f64,
}

impl PulseExtraction {
    /// Total mode damping during the pulse over that between pulses.
    pub fn pulse_factor(&self) -> f64 {
        (self.gamma_qcr + self.gamma_extra) / (self.gamma_off + self.gamma_extra)
    }

    /// Extracted rate is unphysical.
    pub fn is_negative(&self) -> bool {
        self.gamma_qcr < 0.0
    }
}

/// Pulse-length sweep: for each flat-top width τ the signal drop
/// ln[A(t_b)/A(t_a)] is recorded between a probe before and after the pulse.
/// Its slope in τ is half the damping change during the pulse, independent
/// of the pulse edges.
pub fn extract_gamma_by_pulse_sweep<S: RateSource + ?Sized>(
    init: &LadderState,
    widths: &[f64],
    template: &PulseSchedule,
    env: &S,
    bath: ExtraBath,
    t_before: f64,
    t_after: f64,
) -> Result<PulseExtraction> {
    let mut distinct: Vec<f64> = widths.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::FitDegenerate("pulse sweep needs four distinct widths"));
    }
    let longest = template.with_width(distinct[distinct.len() - 1]);
    ensure(t_before >= 0.0 && t_before <= template.support().0, "t_before", "must precede the pulse")?;
    ensure(t_after >= longest.support().1, "t_after", "must follow the longest pulse")?;

    let mut drops = Vec::with_capacity(widths.len());
    for &w in widths {
        let traj = evolve(init, &template.with_width(w), env, bath, &[t_before, t_after])?;
        let (a, b) = (traj.states[0].amplitude(), traj.states[1].amplitude());
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::FitDegenerate("signal vanished before the probe"));
        }
        drops.push((a / b).ln());
    }
    let fit = fit_line(widths, &drops)?;
    let gamma_off = env.rates(template.baseline)?.net();
    let excess = 2.0 * fit.slope;
    Ok(PulseExtraction {
        gamma_qcr: excess + gamma_off,
        excess,
        excess_err: 2.0 * fit.slope_err,
        gamma_off,
        gamma_extra: bath.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_decay_of_mean_photon_number() {
        let gamma = 2e7;
        let env = ConstantRates(RatePair::new(0.0, gamma));
        let init = LadderState::poisson(3.0, 40).unwrap();
        let times = [0.0, 2e-8, 5e-8, 1e-7];
        let traj = evolve(&init, &PulseSchedule::constant(0.0), &env, ExtraBath::default(), &times).unwrap();
        for (t, s) in times.iter().zip(&traj.states) {
            let expected = init.mean_n() * (-gamma * t).exp();
            assert!((s.mean_n() / expected - 1.0).abs() < 1e-6);
            assert!((s.total() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ground_state_stays_put_without_excitation() {
        let env = ConstantRates(RatePair::new(0.0, 1e8));
        let infid = reset_infidelity(&LadderState::ground(10), 1e-7, &env, 0.0, ExtraBath::default()).unwrap();
        assert_eq!(infid, 0.0);
    }

    #[test]
    fn leakage_is_reported() {
        let env = ConstantRates(RatePair::new(5e7, 6e7));
        let err = evolve(&LadderState::ground(5), &PulseSchedule::constant(0.0), &env, ExtraBath::default(), &[1e-6]);
        assert!(matches!(err, Err(Error::Leakage { .. })));
    }

    #[test]
    fn envelope_shape() {
        let p = PulseSchedule {
            baseline: 0.0,
            amplitude: 1.0,
            start: 10.0,
            width: 5.0,
            rise_fall: 1.0,
        };
        assert_eq!(p.bias(12.0), 1.0);
        assert_eq!(p.bias(0.0), 0.0);
        assert!((p.bias(9.0) - (-0.5_f64).exp()).abs() < 1e-15);
        assert!((p.bias(16.0) - (-0.5_f64).exp()).abs() < 1e-15);
        let rect = PulseSchedule { rise_fall: 0.0, ..p };
        assert_eq!(rect.bias(9.999), 0.0);
    }

    #[test]
    fn too_few_widths() {
        let env = ConstantRates(RatePair::new(0.0, 1e6));
        let t = PulseSchedule {
            baseline: 0.0,
            amplitude: 1.0,
            start: 1e-8,
            width: 0.0,
            rise_fall: 0.0,
        };
        let init = LadderState::poisson(2.0, 30).unwrap();
        let r = extract_gamma_by_pulse_sweep(&init, &[1e-9, 1e-9, 2e-9, 3e-9], &t, &env, ExtraBath::default(), 0.0, 1e-7);
        assert!(matches!(r, Err(Error::FitDegenerate(_))));
    }
}
