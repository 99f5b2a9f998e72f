//! Values checked against independent reference computations written out in
//! the test itself: brute-force quadratures, dense grid searches, matrix
//! exponentials and forward-simulated synthetic data.

use num_complex::Complex64;
use qcrlab_core::constants::*;
use qcrlab_core::dynamics::*;
use qcrlab_core::ep::*;
use qcrlab_core::junction::*;
use qcrlab_core::lamb::*;
use qcrlab_core::source_calib::*;
use qcrlab_core::spectrum::*;
use qcrlab_core::thermal::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn reference_junction(dynes: f64, temp_n: f64) -> JunctionParams {
    JunctionParams::new(ghz_to_joule(50.0), dynes, 1e4, temp_n).unwrap()
}

fn reference_mode() -> ModeParams {
    ModeParams::new(ghz_to_angular(10.0), 50.0, 0.3)
}

// ---------------------------------------------------------------- junction

/// Composite Simpson rule for F(E)·h/Δ on a uniform grid fine enough to
/// resolve the Dynes peaks.
fn simpson_forward_rate(e: f64, p: &JunctionParams, n: usize) -> f64 {
    let beta = p.delta / (BOLTZMANN * p.temp_n);
    let xe = e / p.delta;
    let (lo, hi) = (xe.min(0.0) - 40.0 / beta, xe.max(0.0) + 40.0 / beta);
    let h = (hi - lo) / n as f64;
    let f = |x: f64| {
        let z = Complex64::new(x, p.dynes);
        let dos = (z / (z * z - 1.0).sqrt()).re.abs();
        let occ = 1.0 / (1.0 + ((x - xe) * beta).exp());
        let empty = 1.0 / (1.0 + (-x * beta).exp());
        dos * occ * empty
    };
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0 * p.delta / PLANCK
}

#[test]
fn forward_rate_matches_brute_force_simpson() {
    let p = reference_junction(1e-3, 0.1);
    for e in [-0.5, 0.3, 0.9, 1.2, 2.0] {
        let e = e * p.delta;
        let quad = forward_rate(e, &p).unwrap();
        let brute = simpson_forward_rate(e, &p, 2_000_000);
        assert!(rel(quad, brute) < 1e-5, "E/Δ = {}: {quad} vs {brute}", e / p.delta);
    }
}

#[test]
fn dos_far_above_gap_without_broadening() {
    assert!(rel(dos_reduced(10.0, 0.0), 10.0 / 99f64.sqrt()) < 1e-14);
    assert!(rel(dos_reduced(10.0, 0.0), 1.00504) < 1e-5);
}

// ---------------------------------------------------------------- spectrum

/// ⟨k|exp(ρ(a† − a))|l⟩ from a truncated matrix exponential
/// (scaling and squaring with a Taylor series).
fn displacement_matrix(rho: f64, dim: usize) -> Vec<Vec<f64>> {
    let mut gen = vec![vec![0.0; dim]; dim];
    for n in 0..dim - 1 {
        let s = ((n + 1) as f64).sqrt();
        gen[n + 1][n] = rho * s;
        gen[n][n + 1] = -rho * s;
    }
    let squarings = 8;
    let scale = 0.5f64.powi(squarings);
    let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
        let mut c = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for k in 0..dim {
                if a[i][k] != 0.0 {
                    for j in 0..dim {
                        c[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
        }
        c
    };
    let g: Vec<Vec<f64>> = gen.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut out = vec![vec![0.0; dim]; dim];
    let mut term = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        out[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for k in 1..30 {
        term = mul(&term, &g);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                out[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        out = mul(&out, &out);
    }
    out
}

#[test]
fn fock_matrix_matches_matrix_exponential() {
    for rho in [0.1, 0.7, 1.3] {
        let d = displacement_matrix(rho, 90);
        for (k, row) in d.iter().enumerate().take(15) {
            for (l, dkl) in row.iter().enumerate().take(15) {
                let oracle = dkl * dkl;
                let ours = fock_matrix_sq(k, l, rho);
                assert!((ours - oracle).abs() < 1e-12, "rho {rho} k {k} l {l}: {ours} vs {oracle}");
            }
        }
    }
}

#[test]
fn displaced_basis_completeness() {
    let s: f64 = (0..=200).map(|l| fock_matrix_sq(3, l, 0.7)).sum();
    assert!((s - 1.0).abs() < 1e-10);
}

#[test]
fn poisson_occupation() {
    let d = DriveState::coherent(2.0, 1, 40);
    assert!((occupation_prob(2, &d) - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    assert!((occupation_prob(2, &d) - 0.2707).abs() < 1e-4);
}

#[test]
fn zero_bias_detailed_balance() {
    let j = reference_junction(1e-4, 0.1);
    let mode = reference_mode();
    let r = transition_rates(0.0, &mode, &j, &DeviceConfig::sinis()).unwrap();
    let boltz = (-HBAR * mode.omega / (BOLTZMANN * j.temp_n)).exp();
    assert!(rel(r.up / r.down, boltz) < 1e-6);
}

#[test]
fn steady_p1_at_unit_log_ratio() {
    let p = steady_p1(&RatePair::new((-1.0f64).exp(), 1.0)).unwrap();
    assert!((p - 1.0 / (1.0 + std::f64::consts::E)).abs() < 1e-15);
    assert!((p - 0.2689).abs() < 1e-4);
}

#[test]
fn optimal_bias_matches_dense_grid() {
    let j = reference_junction(1e-4, 0.1);
    let mode = reference_mode();
    let dev = DeviceConfig::sinis();
    let hi = search_limit(&j, &dev);
    let n = 2001;
    let step = hi / (n - 1) as f64;
    let (mut best_v, mut best_t) = (0.0, f64::INFINITY);
    for i in 0..n {
        let v = i as f64 * step;
        let r = transition_rates(v, &mode, &j, &dev).unwrap();
        if let Ok(t) = effective_temperature(&r, mode.omega) {
            if t < best_t {
                best_t = t;
                best_v = v;
            }
        }
    }
    let ob = optimal_bias(&mode, &j, &dev).unwrap();
    assert!((ob.bias - best_v).abs() <= step, "{} vs grid {}", ob.bias, best_v);
    assert!(ob.t_eff <= best_t * (1.0 + 1e-9));
}

#[test]
fn tabulated_spectrum_spot_values() {
    let j = reference_junction(1e-4, 0.1);
    let mode = reference_mode();
    let dev = DeviceConfig::sinis();
    let v = 1.9 * j.delta / ELEMENTARY_CHARGE;
    let grid = log_grid(ghz_to_angular(1.0), ghz_to_angular(40.0), 64);
    let s = tabulate_spectrum(v, &grid, &mode, &j, &dev).unwrap();
    for i in [0, 7, 23, 41, 63] {
        let direct = gamma_dc(v, &mode.with_omega(grid[i]), &j, &dev).unwrap();
        assert_eq!(s.values[i], direct.max(0.0));
    }
}

#[test]
fn rf_drive_opens_the_zero_bias_channel() {
    let j = reference_junction(1e-4, 0.1);
    let dev = DeviceConfig::sinis();
    let mp = ModeParams::new(ghz_to_angular(8.8), 50.0, 0.3);
    let ms = ModeParams::new(ghz_to_angular(17.6), 50.0, 0.3);
    let g0 = gamma_rf(0.0, &mp, &ms, &DriveState::coherent_auto(0.0, 8), &j, &dev, Coupling::Net).unwrap();
    let driven = gamma_rf(0.0, &mp, &ms, &DriveState::coherent_auto(1000.0, 8), &j, &dev, Coupling::Net).unwrap();
    assert!(driven / g0 >= 100.0, "enhancement {}", driven / g0);
}

#[test]
fn rf_truncation_converges() {
    let j = reference_junction(1e-4, 0.1);
    let dev = DeviceConfig::sinis();
    let mp = ModeParams::new(ghz_to_angular(8.8), 50.0, 0.3);
    let ms = ModeParams::new(ghz_to_angular(17.6), 50.0, 0.3);
    let d5 = DriveState::coherent(3.0, 5, 60);
    let d8 = DriveState::coherent(3.0, 8, 60);
    let a = gamma_rf(0.0, &mp, &ms, &d5, &j, &dev, Coupling::Net).unwrap();
    let b = gamma_rf(0.0, &mp, &ms, &d8, &j, &dev, Coupling::Net).unwrap();
    assert!(rel(a, b) < 1e-6);
}

// ---------------------------------------------------------------- lamb

#[test]
fn narrow_band_lamb_shift() {
    let omega_r = ghz_to_angular(5.0);
    let omega_0 = 2.0 * omega_r;
    let w = 0.01 * omega_0;
    let gamma_0 = 1e7;
    let (e1, e2) = (omega_0 - 0.5 * w, omega_0 + 0.5 * w);
    let eta = 1e-9 * w;
    let mut grid: Vec<f64> = default_grid(omega_r).into_iter().filter(|x| *x < e1 - eta || *x > e2 + eta).collect();
    grid.extend([e1 - eta, e2 + eta]);
    grid.extend((0..=400).map(|i| e1 + w * i as f64 / 400.0));
    grid.sort_by(|a, b| a.total_cmp(b));
    let values = grid.iter().map(|x| if *x >= e1 && *x <= e2 { gamma_0 } else { 0.0 }).collect();
    let s = SpectralDensity::new(grid, values).unwrap();
    let shift = lamb_shift(&s, omega_r).unwrap().shift;
    let limit = -(gamma_0 * w / std::f64::consts::TAU)
        * (1.0 / (omega_0 - omega_r) + 1.0 / (omega_0 + omega_r) - 2.0 / omega_0);
    assert!(rel(shift, limit) < 1e-2, "{shift} vs {limit}");
}

#[test]
fn pv_of_shifted_constant() {
    let est = pv_integral(|w| w / (w - 1.0), 1.0, 0.0, 2.0).unwrap();
    assert!((est.value - 2.0).abs() < 1e-10);
}

#[test]
fn pv_against_log_closed_form() {
    // PV ∫₀^W dω / (ω² − a²) = (1/2a) ln((W − a)/(W + a)).
    let (a, w) = (1.0, 7.0);
    let est = pv_integral(|x| 1.0 / (x * x - a * a), a, 0.0, w).unwrap();
    let exact = ((w - a) / (w + a)).ln() / (2.0 * a);
    assert!((est.value - exact).abs() < 1e-10, "{} vs {exact}", est.value);
}

// ---------------------------------------------------------------- dynamics

#[test]
fn ladder_relaxes_to_geometric_steady_state() {
    let r = RatePair::new(2e6, 1e7);
    let traj = evolve(
        &LadderState::fock(3, 40).unwrap(),
        &PulseSchedule::constant(0.0),
        &ConstantRates(r),
        ExtraBath::default(),
        &[20.0 / r.net()],
    )
    .unwrap();
    let q = r.up / r.down;
    let end = &traj.states[0];
    for (m, p) in end.probs.iter().enumerate() {
        let geometric = (1.0 - q) * q.powi(m as i32);
        assert!((p - geometric).abs() < 1e-6, "m = {m}");
    }
    let marginal = end.probs[1] / (end.probs[0] + end.probs[1]);
    assert!((marginal - steady_p1(&r).unwrap()).abs() < 1e-6);
}

/// At T_N = 10 mK the T_T minimum is degenerate (rates vanish deep in the
/// gap), so the hold bias is scanned just above the single-photon edge.
#[test]
fn reset_at_ten_millikelvin() {
    let j = JunctionParams::new(ghz_to_joule(50.0), 1e-4, 1e4, 0.01).unwrap();
    let mode = reference_mode();
    let env = QcrEnvironment {
        mode,
        junction: j,
        device: DeviceConfig::sinis(),
    };
    let edge = 2.0 * (j.delta - mode.photon_energy()) / ELEMENTARY_CHARGE;
    let best = (0..=6)
        .map(|i| {
            let v = edge * (1.0 + 0.05 * i as f64);
            reset_infidelity(&LadderState::fock(1, 30).unwrap(), 100e-9, &env, v, ExtraBath::default()).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best <= 1e-3, "{best}");
}

#[test]
fn reset_long_hold_reaches_steady_infidelity() {
    let r = RatePair::new(1e6, 1e8);
    let inf = reset_infidelity(&LadderState::fock(2, 30).unwrap(), 1e-5, &ConstantRates(r), 0.0, ExtraBath::default()).unwrap();
    let steady = LadderState::steady(r, 30).unwrap();
    assert!((inf - (1.0 - steady.probs[0])).abs() < 1e-9);
}

#[test]
fn pulse_sweep_recovers_programmed_rate() {
    let gamma_pulse = 5e7;
    let table = RateTable::new(
        vec![0.0, 1.0],
        &[RatePair::new(1e2, 1e5), RatePair::new(1e-3 * gamma_pulse, gamma_pulse)],
    )
    .unwrap();
    let template = PulseSchedule {
        baseline: 0.0,
        amplitude: 1.0,
        start: 30e-9,
        width: 0.0,
        rise_fall: 2e-9,
    };
    let widths = [5e-9, 10e-9, 15e-9, 20e-9, 25e-9];
    let ex = extract_gamma_by_pulse_sweep(
        &LadderState::poisson(10.0, 60).unwrap(),
        &widths,
        &template,
        &table,
        ExtraBath::cold(1e6),
        10e-9,
        90e-9,
    )
    .unwrap();
    let programmed = gamma_pulse * (1.0 - 1e-3);
    assert!(rel(ex.gamma_qcr, programmed) < 1e-2, "{} vs {programmed}", ex.gamma_qcr);
    assert!(!ex.is_negative());
}

#[test]
fn zero_amplitude_pulse_extracts_nothing() {
    let env = ConstantRates(RatePair::new(0.0, 3e5));
    let template = PulseSchedule {
        baseline: 0.0,
        amplitude: 0.0,
        start: 20e-9,
        width: 0.0,
        rise_fall: 1e-9,
    };
    let ex = extract_gamma_by_pulse_sweep(
        &LadderState::poisson(5.0, 50).unwrap(),
        &[2e-9, 4e-9, 6e-9, 8e-9],
        &template,
        &env,
        ExtraBath::default(),
        5e-9,
        60e-9,
    )
    .unwrap();
    assert!(ex.excess.abs() <= 3.0 * ex.excess_err.max(1e-3), "excess {}", ex.excess);
}

// ---------------------------------------------------------------- ep

fn ep_template(kappa1: f64) -> TwoModeParams {
    let g = 1.0;
    TwoModeParams {
        omega1: 0.0,
        kappa1: kappa1 * g,
        delta: 0.0,
        kappa2: 0.0,
        g,
    }
}

#[test]
fn real_splitting_below_the_ep() {
    for k2 in [0.0, 0.5, 1.0, 2.0, 3.5] {
        let p = TwoModeParams { kappa2: k2, ..ep_template(0.0) };
        let l = eigenvalues(&p);
        let expected = 2.0 * (1.0 - k2 * k2 / 16.0f64).sqrt();
        assert!(((l[1].re - l[0].re) - expected).abs() < 1e-13);
    }
}

#[test]
fn locus_matches_dense_grid_minimum() {
    let t = ep_template(0.1);
    let locus = ep_locus(&t).unwrap();
    let n = 801;
    let (dlo, dhi, klo, khi) = (-1.0, 1.0, 3.0, 5.0);
    let (hd, hk) = ((dhi - dlo) / (n - 1) as f64, (khi - klo) / (n - 1) as f64);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            let delta = dlo + i as f64 * hd;
            let kappa2 = klo + k as f64 * hk;
            let d = TwoModeParams { delta, kappa2, ..t }.discriminant().norm();
            if d < best.0 {
                best = (d, delta, kappa2);
            }
        }
    }
    let hit = locus
        .iter()
        .find(|p| (p.delta - best.1).abs() <= hd && (p.kappa2 - best.2).abs() <= hk);
    assert!(hit.is_some(), "{locus:?} vs grid ({}, {})", best.1, best.2);
}

fn local_minima(row: &[f64]) -> Vec<usize> {
    (1..row.len() - 1).filter(|&i| row[i] < row[i - 1] && row[i] <= row[i + 1]).collect()
}

#[test]
fn weakly_damped_second_mode_anticrosses() {
    let g = TAU_F * 10e6;
    let omega1 = TAU_F * 5e9;
    let t = TwoModeParams { omega1, kappa1: 0.1 * g, delta: 0.0, kappa2: 0.1 * g, g };
    let fm = FluxMap { phi_grid: vec![0.0], omega2_max: omega1 };
    let probe: Vec<f64> = (0..4001).map(|i| omega1 - 5.0 * g + 10.0 * g * i as f64 / 4000.0).collect();
    let map = transmission_map(&fm, &t, t.kappa1, &probe).unwrap();
    let mins = local_minima(&map[0]);
    assert_eq!(mins.len(), 2);
    let split = probe[mins[1]] - probe[mins[0]];
    assert!(rel(split, 2.0 * g) < 0.02, "split/g = {}", split / g);
}

#[test]
fn overdamped_second_mode_gives_one_dip() {
    let g = TAU_F * 10e6;
    let omega1 = TAU_F * 5e9;
    let t = TwoModeParams { omega1, kappa1: 0.1 * g, delta: 0.0, kappa2: 10.0 * g, g };
    let fm = FluxMap { phi_grid: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.3], omega2_max: omega1 };
    let probe: Vec<f64> = (0..4001).map(|i| omega1 - 5.0 * g + 10.0 * g * i as f64 / 4000.0).collect();
    for row in transmission_map(&fm, &t, t.kappa1, &probe).unwrap() {
        assert_eq!(local_minima(&row).len(), 1);
    }
}

const TAU_F: f64 = std::f64::consts::TAU;

// ---------------------------------------------------------------- source and calibration

fn calibration_params() -> CalibrationParams {
    CalibrationParams {
        gamma_tr: 5e6,
        gamma_t_bar: 8e6,
        gamma_x: 1e6,
        n_tr: 0.05,
        n_x: 0.1,
        omega_r: ghz_to_angular(4.7),
        delta: micro_ev_to_joule(215.0),
    }
}

fn bias_points(cp: &CalibrationParams, n: usize) -> Vec<f64> {
    // eV/2Δ from 3 to 15 across a SINIS device.
    let unit = 2.0 * 2.0 * cp.delta / ELEMENTARY_CHARGE;
    (0..n).map(|i| unit * (3.0 + 12.0 * i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn power_fit_recovers_coefficients() {
    let (a, b, c) = (3e-13, 2e-15, -1e-18);
    let samples: Vec<(f64, f64)> = (0..50)
        .map(|i| {
            let v = 1e-3 + 1e-4 * i as f64;
            (v, a * v + b + c / v)
        })
        .collect();
    let fit = fit_output_power(&samples).unwrap();
    assert!(rel(fit.a, a) < 1e-10 && rel(fit.b, b) < 1e-10 && rel(fit.c, c) < 1e-10);
}

#[test]
fn power_fit_error_scales_with_noise() {
    let (a, b, c) = (3e-13, 2e-15, -1e-18);
    let vs: Vec<f64> = (0..50).map(|i| 1e-3 + 1e-4 * i as f64).collect();
    let rms_error = |sigma: f64, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let trials = 400;
        let mut acc = 0.0;
        for _ in 0..trials {
            let s: Vec<(f64, f64)> = vs.iter().map(|&v| (v, a * v + b + c / v + noise.sample(&mut rng))).collect();
            acc += (fit_output_power(&s).unwrap().a - a).powi(2);
        }
        (acc / trials as f64).sqrt()
    };
    let e1 = rms_error(1e-17, 1);
    let e2 = rms_error(1e-16, 2);
    let e3 = rms_error(1e-15, 3);
    assert!((e2 / e1 / 10.0 - 1.0).abs() < 0.15, "{}", e2 / e1);
    assert!((e3 / e2 / 10.0 - 1.0).abs() < 0.15, "{}", e3 / e2);
}

#[test]
fn asymptotic_slope_of_transmitted_power() {
    let cp = calibration_params();
    let v = 10.0;
    let slope = p_tr_model(2.0 * v, &cp).unwrap() - p_tr_model(v, &cp).unwrap();
    let total = cp.gamma_tr + cp.gamma_t_bar + cp.gamma_x;
    let expected = ELEMENTARY_CHARGE / 4.0 * cp.gamma_tr * cp.gamma_t_bar / total;
    assert!(rel(slope / v, expected) < 1e-9);
}

fn synthetic_chain(gain: f64, t_noise: f64, bandwidth: f64, sigma: f64, seed: u64) -> (Vec<(f64, f64)>, f64) {
    let cp = calibration_params();
    let floor = BOLTZMANN * t_noise * bandwidth;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let samples = bias_points(&cp, 100)
        .into_iter()
        .map(|v| (v, gain * (p_tr_model(v, &cp).unwrap() + floor) + noise.sample(&mut rng)))
        .collect();
    // The zero-bias level is averaged over as many readings as the sweep has.
    let p0 = (0..100).map(|_| gain * floor + noise.sample(&mut rng)).sum::<f64>() / 100.0;
    (samples, p0)
}

#[test]
fn noiseless_chain_is_recovered_exactly() {
    let cp = calibration_params();
    let (samples, p0) = synthetic_chain(1e5, 5.0, 1e6, 0.0, 0);
    let rec = calibrate(&samples, p0, &cp, 1e6).unwrap();
    assert!(rel(rec.gain, 1e5) < 1e-6 && rel(rec.t_noise, 5.0) < 1e-6);
}

#[test]
fn noisy_chain_recovers_gain_and_noise_temperature() {
    let cp = calibration_params();
    let (gain, t_noise, bw) = (1e5, 5.0, 1e6);
    // Noise at 0.1 % of the largest transmitted power.
    let scale = gain * p_tr_model(*bias_points(&cp, 100).last().unwrap(), &cp).unwrap();
    let (samples, p0) = synthetic_chain(gain, t_noise, bw, 1e-3 * scale, 7);
    let rec = calibrate(&samples, p0, &cp, bw).unwrap();
    assert!(rel(rec.gain, gain) < 1e-2, "gain {}", rec.gain);
    assert!(rel(rec.t_noise, t_noise) < 2e-2, "t_noise {}", rec.t_noise);
}

#[test]
fn reflection_fit_on_noiseless_trace() {
    let (omega_r, gamma_tr, gamma_int) = (ghz_to_angular(4.7), 1e7, 4e6);
    let kappa = gamma_tr + gamma_int;
    let trace: Vec<(f64, Complex64)> = (0..2001)
        .map(|i| {
            let w = omega_r - 10.0 * kappa + 20.0 * kappa * i as f64 / 2000.0;
            (w, reflection(w, omega_r, gamma_tr, gamma_int))
        })
        .collect();
    let fit = fit_reflection(&trace).unwrap();
    assert!(rel(fit.omega_r, omega_r) < 1e-6);
    assert!(rel(fit.gamma_tr, gamma_tr) < 1e-6);
    assert!(rel(fit.gamma_int, gamma_int) < 1e-6);
}

// ---------------------------------------------------------------- thermal

#[test]
fn finite_difference_response() {
    let net = ThermalNetwork::from_a_coeff(200.0, 0.1, 0.0, 1e-19);
    let h = 1e-5 * net.t0;
    let up = steady_state(&net, net.t0 + h).unwrap();
    let down = steady_state(&net, net.t0 - h).unwrap();
    let slope = (up - down) / (2.0 * h);
    let formula = differential_response(net.t0, net.a_coeff());
    assert!((slope - formula).abs() < 1e-4, "{slope} vs {formula}");
}

#[test]
fn steady_state_matches_bisection() {
    let net = ThermalNetwork::from_a_coeff(80.0, 0.05, 2e-16, 1e-19);
    let t_b = 0.2;
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if net.heat_balance(mid, t_b) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = steady_state(&net, t_b).unwrap();
    assert!((root - 0.5 * (lo + hi)).abs() < 1e-12);
}
