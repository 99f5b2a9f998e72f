//! One function per sweep command. Each returns the output table and a
//! JSON summary of derived quantities for the sidecar.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::{json, Value};

use qcrlab_core::constants::{micro_ev_to_joule, BOLTZMANN};
use qcrlab_core::dynamics::{evolve, ExtraBath, LadderState, PulseSchedule, QcrEnvironment};
use qcrlab_core::ep::{ep_locus, transmission_map, FluxMap, TwoModeParams};
use qcrlab_core::lamb::{lamb_shift, log_grid};
use qcrlab_core::source_calib::{
    bose_occupation, calibrate, p_tr_model, source_point, CalibrationParams, PhotonSourceParams,
};
use qcrlab_core::spectrum::{
    effective_temperature, gamma_dc, on_off_ratio, optimal_bias, rf_rates, steady_p1, tabulate_spectrum,
    transition_rates, DriveState, RatePair,
};
use qcrlab_core::thermal::{differential_response, g_quantum, steady_state};

use crate::config::{
    BiasParams, CalibrateParams, EpParams, InitKind, LambParams, Params, ResetParams, RfParams, SourceParams,
    Statistics, SweepConfig, ThermalParams,
};
use crate::error::{CliError, Result};
use crate::table::Table;

pub struct RunResult {
    pub table: Table,
    pub summary: Value,
}

pub fn run(cfg: &SweepConfig, seed: u64) -> Result<RunResult> {
    let axis = cfg.grid.to_vec();
    match &cfg.params {
        Params::SweepBias(p) => sweep_bias(p, &axis),
        Params::RfSweep(p) => rf_sweep(p, &axis),
        Params::LambShift(p) => lamb(p, &axis),
        Params::ResetSim(p) => reset(p, &axis),
        Params::EpMap(p) => ep_map(p, &axis),
        Params::Source(p) => source(p, &axis),
        Params::Calibrate(p) => calibrate_chain(p, &axis, seed),
        Params::Thermal(p) => thermal(p, &axis),
    }
}

/// Resolved inputs and results of a run, written next to the table.
pub fn sidecar(cfg: &SweepConfig, result: &RunResult, seed: u64) -> Value {
    let columns: Vec<Value> = result
        .table
        .columns
        .iter()
        .map(|c| json!({ "name": c.name, "unit": c.unit }))
        .collect();
    json!({
        "tool": "qcrlab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "params": serde_json::to_value(&cfg.params).expect("params serialize"),
        "grid": serde_json::to_value(&cfg.grid).expect("grid serializes"),
        "points": cfg.grid.len(),
        "rows": result.table.rows.len(),
        "seed": seed,
        "columns": columns,
        "summary": result.summary,
    })
}

/// Evaluates `f` on every axis point in parallel; the first failure in
/// axis order is reported.
fn par_rows<F>(axis: &[f64], label: &str, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> std::result::Result<Vec<f64>, qcrlab_core::Error> + Sync,
{
    axis.par_iter()
        .map(|&x| f(x).map_err(|e| CliError::numeric(format!("{label} = {x:e}"), e)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn numeric(context: &str) -> impl Fn(qcrlab_core::Error) -> CliError + '_ {
    move |e| CliError::numeric(context, e)
}

/// Steady-state quantities that are undefined for some rate pairs are
/// reported as NaN rather than failing the sweep.
fn or_nan(r: qcrlab_core::Result<f64>) -> qcrlab_core::Result<f64> {
    match r {
        Err(qcrlab_core::Error::UndefinedSteadyState) | Err(qcrlab_core::Error::NonPositiveTemperature { .. }) => {
            Ok(f64::NAN)
        }
        other => other,
    }
}

fn sweep_bias(p: &BiasParams, axis: &[f64]) -> Result<RunResult> {
    let (j, mode, dev) = (p.junction.build(), p.mode.build(), p.device.build());
    let mut table = Table::new(
        "qcrlab sweep-bias",
        &[
            ("bias_norm", "1"),
            ("bias", "V"),
            ("gamma_up", "1/s"),
            ("gamma_down", "1/s"),
            ("gamma", "1/s"),
            ("p1", "1"),
            ("t_eff", "K"),
        ],
    );
    table.rows = par_rows(axis, "bias_norm", |x| {
        let v = p.junction.bias(x);
        let r = transition_rates(v, &mode, &j, &dev)?;
        Ok(vec![
            x,
            v,
            r.up,
            r.down,
            r.net(),
            or_nan(steady_p1(&r))?,
            or_nan(effective_temperature(&r, mode.omega))?,
        ])
    })?;
    let opt = optimal_bias(&mode, &j, &dev).map_err(numeric("optimal bias"))?;
    let onoff = on_off_ratio(&mode, &j, &dev).map_err(numeric("on/off ratio"))?;
    let two_delta = p.junction.bias(1.0);
    Ok(RunResult {
        table,
        summary: json!({
            "optimal_bias": opt.bias,
            "optimal_bias_norm": opt.bias / two_delta,
            "t_eff_min": opt.t_eff,
            "bias_on": onoff.bias_on,
            "bias_on_norm": onoff.bias_on / two_delta,
            "gamma_on": onoff.gamma_on,
            "gamma_off": onoff.gamma_off,
            "on_off_ratio": onoff.ratio,
        }),
    })
}

fn rf_sweep(p: &RfParams, axis: &[f64]) -> Result<RunResult> {
    let j = p.junction.build();
    let (mp, ms, dev) = (p.primary.build(), p.supporting.build(), p.device.build());
    let v = p.junction.bias(p.bias_norm);
    let fock_cut = p.fock_cut.expect("resolved");
    let undriven = gamma_dc(v, &mp, &j, &dev).map_err(numeric("undriven rate"))?;
    let mut table = Table::new(
        "qcrlab rf-sweep",
        &[
            ("mean_n", "1"),
            ("gamma_up", "1/s"),
            ("gamma_down", "1/s"),
            ("gamma", "1/s"),
            ("gamma_absorption", "1/s"),
            ("enhancement", "1"),
        ],
    );
    table.rows = par_rows(axis, "mean_n", |n| {
        let d = match p.statistics {
            Statistics::Coherent => DriveState::coherent(n, p.l_max, fock_cut),
            Statistics::Thermal => DriveState::thermal(n, p.l_max, fock_cut),
        };
        let r = rf_rates(v, &mp, &ms, &d, &j, &dev)?;
        Ok(vec![n, r.up, r.down, r.net(), r.down, r.net() / undriven])
    })?;
    Ok(RunResult {
        table,
        summary: json!({ "bias": v, "gamma_undriven": undriven }),
    })
}

fn lamb(p: &LambParams, axis: &[f64]) -> Result<RunResult> {
    let (j, mode, dev) = (p.junction.build(), p.mode.build(), p.device.build());
    let w = mode.omega;
    let grid = log_grid(w / p.spectrum.span, w * p.spectrum.span, p.spectrum.points);
    // Reported as ω_L/2π.
    let shift_at = |v: f64| -> qcrlab_core::Result<(f64, f64)> {
        let s = tabulate_spectrum(v, &grid, &mode, &j, &dev)?;
        let l = lamb_shift(&s, w)?;
        Ok((l.shift / TAU, l.abs_err / TAU))
    };
    let (zero, _) = shift_at(0.0).map_err(numeric("zero bias"))?;
    let mut table = Table::new(
        "qcrlab lamb-shift",
        &[
            ("bias_norm", "1"),
            ("bias", "V"),
            ("gamma", "1/s"),
            ("lamb_shift", "Hz"),
            ("lamb_shift_err", "Hz"),
            ("lamb_shift_ref", "Hz"),
        ],
    );
    table.rows = par_rows(axis, "bias_norm", |x| {
        let v = p.junction.bias(x);
        let (shift, err) = shift_at(v)?;
        Ok(vec![x, v, gamma_dc(v, &mode, &j, &dev)?, shift, err, shift - zero])
    })?;
    Ok(RunResult {
        table,
        summary: json!({ "lamb_shift_zero_bias": zero }),
    })
}

fn with_bath(r: RatePair, bath: ExtraBath) -> RatePair {
    RatePair::new(r.up + bath.gamma * bath.n_th, r.down + bath.gamma * (bath.n_th + 1.0))
}

fn reset(p: &ResetParams, axis: &[f64]) -> Result<RunResult> {
    let env = QcrEnvironment {
        mode: p.mode.build(),
        junction: p.junction.build(),
        device: p.device.build(),
    };
    let bath = ExtraBath {
        gamma: p.extra_bath.gamma,
        n_th: p.extra_bath.n_th,
    };
    let v = p.junction.bias(p.bias_norm);
    let init = match p.init.kind {
        InitKind::Fock => LadderState::fock(p.init.n as usize, p.n_cut),
        InitKind::Thermal => LadderState::thermal(p.init.n, p.n_cut),
        InitKind::Poisson => LadderState::poisson(p.init.n, p.n_cut),
    }
    .map_err(numeric("params.init"))?;
    let traj = evolve(&init, &PulseSchedule::constant(v), &env, bath, axis).map_err(numeric("evolution"))?;
    let mut table = Table::new(
        "qcrlab reset-sim",
        &[("time", "s"), ("infidelity", "1"), ("mean_n", "1"), ("p0", "1")],
    );
    table.rows = axis
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| vec![t, (1.0 - s.probs[0]).max(0.0), s.mean_n(), s.probs[0]])
        .collect();
    let r = transition_rates(v, &env.mode, &env.junction, &env.device).map_err(numeric("rates"))?;
    let totals = with_bath(r, bath);
    let steady = LadderState::steady(totals, p.n_cut).map_err(numeric("steady state"))?;
    Ok(RunResult {
        table,
        summary: json!({
            "bias": v,
            "gamma_up": r.up,
            "gamma_down": r.down,
            "decay_rate": totals.net(),
            "steady_infidelity": 1.0 - steady.probs[0],
        }),
    })
}

fn ep_map(p: &EpParams, axis: &[f64]) -> Result<RunResult> {
    let template = TwoModeParams {
        omega1: TAU * p.freq1_hz,
        kappa1: p.kappa1,
        delta: 0.0,
        kappa2: p.kappa2,
        g: p.g,
    };
    let fm = FluxMap {
        phi_grid: axis.to_vec(),
        omega2_max: TAU * p.freq2_max_hz,
    };
    let freqs: Vec<f64> = (0..p.probe.points)
        .map(|i| p.probe.start_hz + (p.probe.stop_hz - p.probe.start_hz) * i as f64 / (p.probe.points - 1) as f64)
        .collect();
    let omegas: Vec<f64> = freqs.iter().map(|f| TAU * f).collect();
    let kappa_ext = p.kappa_ext.expect("resolved");
    let map = transmission_map(&fm, &template, kappa_ext, &omegas).map_err(numeric("transmission map"))?;
    let mut table = Table::new("qcrlab ep-map", &[("flux", "Phi0"), ("freq", "Hz"), ("s21_abs", "1")]);
    for (&phi, row) in axis.iter().zip(&map) {
        for (&f, &s) in freqs.iter().zip(row) {
            table.rows.push(vec![phi, f, s]);
        }
    }
    let locus = ep_locus(&template).map_err(numeric("exceptional-point search"))?;
    let points: Vec<Value> = locus
        .iter()
        .map(|e| {
            json!({
                "detuning_hz": e.delta / TAU,
                "kappa2": e.kappa2,
                "separation": e.separation,
                "overlap": e.overlap,
            })
        })
        .collect();
    Ok(RunResult {
        table,
        summary: json!({ "exceptional_points": points }),
    })
}

fn source(p: &SourceParams, axis: &[f64]) -> Result<RunResult> {
    let (j, mode, dev) = (p.junction.build(), p.mode.build(), p.device.build());
    let src = PhotonSourceParams {
        c_coupling: p.line.c_coupling.expect("resolved"),
        omega0: mode.omega,
        z0: p.line.z0,
        l_res: p.line.l_res,
        c_per_len: p.line.c_per_len,
    };
    let n_tl = bose_occupation(p.line_temp, mode.omega).map_err(numeric("params.line_temp"))?;
    let mut table = Table::new(
        "qcrlab source",
        &[
            ("bias_norm", "1"),
            ("bias", "V"),
            ("n_res", "1"),
            ("t_res", "K"),
            ("power", "W"),
            ("power_dbm", "dBm"),
        ],
    );
    table.rows = par_rows(axis, "bias_norm", |x| {
        let v = p.junction.bias(x);
        let s = source_point(v, &src, &mode, &j, &dev, n_tl)?;
        let dbm = if s.power > 0.0 { 10.0 * (s.power / 1e-3).log10() } else { f64::NAN };
        Ok(vec![x, v, s.n_res, s.t_res, s.power, dbm])
    })?;
    Ok(RunResult {
        table,
        summary: json!({ "gamma_tr": src.coupling_rate(), "n_line": n_tl }),
    })
}

/// Synthesizes a measured output-power curve through the configured chain
/// and runs the calibration on it.
fn calibrate_chain(p: &CalibrateParams, axis: &[f64], seed: u64) -> Result<RunResult> {
    let r = &p.rates;
    let cp = CalibrationParams {
        gamma_tr: r.gamma_tr,
        gamma_t_bar: r.gamma_t_bar,
        gamma_x: r.gamma_x,
        n_tr: r.n_tr,
        n_x: r.n_x,
        omega_r: TAU * r.freq_hz,
        delta: micro_ev_to_joule(r.delta_uev),
    };
    let two_delta_v = 2.0 * cp.delta / qcrlab_core::constants::ELEMENTARY_CHARGE;
    let floor = BOLTZMANN * p.chain.t_noise * p.chain.bandwidth;
    let noise = Normal::new(0.0, p.noise_sigma).map_err(|e| CliError::Config(format!("params.noise_sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(axis.len());
    for &x in axis {
        let v = x * two_delta_v;
        let clean = p_tr_model(v, &cp).map_err(numeric("transmitted power"))?;
        samples.push((v, p.chain.gain * (clean + floor) + noise.sample(&mut rng)));
    }
    let reads = p.zero_bias_reads;
    let p0 = (0..reads).map(|_| p.chain.gain * floor + noise.sample(&mut rng)).sum::<f64>() / reads as f64;
    let rec = calibrate(&samples, p0, &cp, p.chain.bandwidth).map_err(numeric("calibration fit"))?;
    let mut table = Table::new(
        "qcrlab calibrate",
        &[("bias_norm", "1"), ("bias", "V"), ("p_out", "W"), ("p_fit", "W")],
    );
    table.rows = axis
        .iter()
        .zip(&samples)
        .map(|(&x, &(v, pw))| vec![x, v, pw, rec.a * v + rec.b + rec.c / v])
        .collect();
    Ok(RunResult {
        table,
        summary: json!({
            "a": rec.a,
            "b": rec.b,
            "c": rec.c,
            "gain": rec.gain,
            "t_noise": rec.t_noise,
            "residual": rec.residual,
            "p_out_zero": p0,
        }),
    })
}

fn thermal(p: &ThermalParams, axis: &[f64]) -> Result<RunResult> {
    let net = p.build();
    let mut table = Table::new(
        "qcrlab thermal",
        &[("t_b", "K"), ("t_a", "K"), ("slope", "1"), ("g_quantum", "W/K")],
    );
    table.rows = par_rows(axis, "t_b", |tb| {
        let h = 1e-4 * tb;
        let slope = (steady_state(&net, tb + h)? - steady_state(&net, tb - h)?) / (2.0 * h);
        Ok(vec![tb, steady_state(&net, tb)?, slope, g_quantum(tb)])
    })?;
    let a = net.a_coeff();
    Ok(RunResult {
        table,
        summary: json!({
            "a_coeff": a,
            "ep_sigma": net.ep_sigma,
            "linear_response": differential_response(net.t0, a),
        }),
    })
}

/// a − b for two Lamb-shift tables on bit-identical bias grids.
pub fn diff_lamb(a: &Table, b: &Table) -> std::result::Result<Table, String> {
    let cols = |t: &Table| -> std::result::Result<(Vec<f64>, Vec<f64>), String> {
        let x = t.column("bias_norm").ok_or("missing column `bias_norm`")?;
        let s = t.column("lamb_shift").ok_or("missing column `lamb_shift`")?;
        Ok((x, s))
    };
    let (xa, sa) = cols(a)?;
    let (xb, sb) = cols(b)?;
    if xa.len() != xb.len() || xa.iter().zip(&xb).any(|(p, q)| p.to_bits() != q.to_bits()) {
        return Err("bias grids differ".into());
    }
    let mut out = Table::new("qcrlab diff-lamb", &[("bias_norm", "1"), ("lamb_shift_diff", "Hz")]);
    out.rows = xa.iter().zip(sa.iter().zip(&sb)).map(|(&x, (p, q))| vec![x, p - q]).collect();
    Ok(out)
}
