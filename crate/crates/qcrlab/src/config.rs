//! Sweep configuration files.
//!
//! A config is a JSON object `{command, params, grid, out_path}`; the shape
//! of `params` depends on `command`. Units: frequencies in Hz, energies in
//! µeV, rates in 1/s (couplings `g` in rad/s), temperatures in K, biases
//! normalized as eV/(2Δ) with V the full device bias. The shipped schema
//! lives in `schema/config.schema.json`.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use qcrlab_core::constants::{micro_ev_to_joule, ELEMENTARY_CHARGE};
use qcrlab_core::junction::{DeviceConfig, JunctionParams};
use qcrlab_core::spectrum::{default_rho, ModeParams};
use qcrlab_core::thermal::ThermalNetwork;
use std::f64::consts::TAU;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SweepBias,
    RfSweep,
    LambShift,
    ResetSim,
    EpMap,
    Source,
    Calibrate,
    Thermal,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::SweepBias,
        Command::RfSweep,
        Command::LambShift,
        Command::ResetSim,
        Command::EpMap,
        Command::Source,
        Command::Calibrate,
        Command::Thermal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::SweepBias => "sweep-bias",
            Command::RfSweep => "rf-sweep",
            Command::LambShift => "lamb-shift",
            Command::ResetSim => "reset-sim",
            Command::EpMap => "ep-map",
            Command::Source => "source",
            Command::Calibrate => "calibrate",
            Command::Thermal => "thermal",
        }
    }

    /// Name and unit of the swept quantity.
    pub fn axis(&self) -> (&'static str, &'static str) {
        match self {
            Command::SweepBias | Command::LambShift | Command::Source | Command::Calibrate => ("bias_norm", "1"),
            Command::RfSweep => ("mean_n", "1"),
            Command::ResetSim => ("time", "s"),
            Command::EpMap => ("flux", "Phi0"),
            Command::Thermal => ("t_b", "K"),
        }
    }
}

fn need(cond: bool, path: &str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: {reason}")))
    }
}

fn positive(v: f64, path: &str) -> Result<()> {
    need(v > 0.0 && v.is_finite(), path, "must be positive")
}

fn nonnegative(v: f64, path: &str) -> Result<()> {
    need(v >= 0.0 && v.is_finite(), path, "must be nonnegative")
}

fn core_error(path: &str, e: qcrlab_core::Error) -> CliError {
    match e {
        qcrlab_core::Error::InvalidParameter { name, reason } => CliError::Config(format!("{path}.{name}: {reason}")),
        other => CliError::Config(format!("{path}: {other}")),
    }
}

fn section<T: DeserializeOwned>(v: Option<&Value>, path: &str) -> Result<T> {
    let v = v.cloned().unwrap_or(Value::Null);
    if v.is_null() {
        return Err(CliError::Config(format!("{path}: missing")));
    }
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

fn default_dynes() -> f64 {
    1e-4
}

fn default_impedance() -> f64 {
    50.0
}

fn default_junctions() -> u8 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionCfg {
    pub delta_uev: f64,
    #[serde(default = "default_dynes")]
    pub dynes: f64,
    pub r_t: f64,
    pub temp_n: f64,
}

impl JunctionCfg {
    fn validate(&self, at: &str) -> Result<()> {
        positive(self.delta_uev, &format!("{at}.delta_uev"))?;
        need((0.0..1.0).contains(&self.dynes), &format!("{at}.dynes"), "must lie in [0, 1)")?;
        positive(self.r_t, &format!("{at}.r_t"))?;
        nonnegative(self.temp_n, &format!("{at}.temp_n"))
    }

    pub fn build(&self) -> JunctionParams {
        JunctionParams {
            delta: micro_ev_to_joule(self.delta_uev),
            dynes: self.dynes,
            r_t: self.r_t,
            temp_n: self.temp_n,
        }
    }

    /// Device bias (V) for eV/(2Δ) = `x`.
    pub fn bias(&self, x: f64) -> f64 {
        x * 2.0 * micro_ev_to_joule(self.delta_uev) / ELEMENTARY_CHARGE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeCfg {
    pub freq_hz: f64,
    #[serde(default = "default_impedance")]
    pub impedance: f64,
    pub alpha: f64,
    /// Defaults to α√(πZ/R_K).
    #[serde(default)]
    pub rho: Option<f64>,
}

impl ModeCfg {
    fn validate(&self, at: &str) -> Result<()> {
        positive(self.freq_hz, &format!("{at}.freq_hz"))?;
        positive(self.impedance, &format!("{at}.impedance"))?;
        need((0.0..=1.0).contains(&self.alpha), &format!("{at}.alpha"), "must lie in [0, 1]")?;
        if let Some(rho) = self.rho {
            nonnegative(rho, &format!("{at}.rho"))?;
        }
        Ok(())
    }

    fn resolve(&mut self) {
        self.rho.get_or_insert(default_rho(self.alpha, self.impedance));
    }

    pub fn build(&self) -> ModeParams {
        let m = ModeParams::new(TAU * self.freq_hz, self.impedance, self.alpha);
        match self.rho {
            Some(rho) => m.with_rho(rho),
            None => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceCfg {
    #[serde(default = "default_junctions")]
    pub junctions: u8,
    #[serde(default)]
    pub charging_energy_uev: f64,
}

impl Default for DeviceCfg {
    fn default() -> Self {
        Self {
            junctions: 2,
            charging_energy_uev: 0.0,
        }
    }
}

impl DeviceCfg {
    fn validate(&self, at: &str) -> Result<()> {
        need(matches!(self.junctions, 1 | 2), &format!("{at}.junctions"), "must be 1 or 2")?;
        nonnegative(self.charging_energy_uev, &format!("{at}.charging_energy_uev"))
    }

    pub fn build(&self) -> DeviceConfig {
        DeviceConfig {
            junctions: self.junctions,
            charging_energy: micro_ev_to_joule(self.charging_energy_uev),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasParams {
    pub junction: JunctionCfg,
    pub mode: ModeCfg,
    #[serde(default)]
    pub device: DeviceCfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    #[default]
    Coherent,
    Thermal,
}

fn default_l_max() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfParams {
    pub junction: JunctionCfg,
    pub primary: ModeCfg,
    pub supporting: ModeCfg,
    #[serde(default)]
    pub device: DeviceCfg,
    /// dc bias eV/(2Δ) applied together with the drive.
    #[serde(default)]
    pub bias_norm: f64,
    #[serde(default)]
    pub statistics: Statistics,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    /// Largest Fock state of the supporting mode; sized from the largest
    /// swept photon number when absent.
    #[serde(default)]
    pub fock_cut: Option<usize>,
}

fn default_spectrum_points() -> usize {
    4001
}

fn default_spectrum_span() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumGridCfg {
    /// Log-spaced points on [ω_r/span, span·ω_r].
    #[serde(default = "default_spectrum_points")]
    pub points: usize,
    #[serde(default = "default_spectrum_span")]
    pub span: f64,
}

impl Default for SpectrumGridCfg {
    fn default() -> Self {
        Self {
            points: default_spectrum_points(),
            span: default_spectrum_span(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambParams {
    pub junction: JunctionCfg,
    pub mode: ModeCfg,
    #[serde(default)]
    pub device: DeviceCfg,
    #[serde(default)]
    pub spectrum: SpectrumGridCfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    #[default]
    Fock,
    Thermal,
    Poisson,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitCfg {
    #[serde(default)]
    pub kind: InitKind,
    /// Fock number, or mean photon number for the distributions.
    #[serde(default = "one")]
    pub n: f64,
}

impl Default for InitCfg {
    fn default() -> Self {
        Self {
            kind: InitKind::Fock,
            n: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BathCfg {
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub n_th: f64,
}

fn default_n_cut() -> usize {
    qcrlab_core::dynamics::DEFAULT_N_CUT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetParams {
    pub junction: JunctionCfg,
    pub mode: ModeCfg,
    #[serde(default)]
    pub device: DeviceCfg,
    pub bias_norm: f64,
    #[serde(default)]
    pub init: InitCfg,
    #[serde(default = "default_n_cut")]
    pub n_cut: usize,
    #[serde(default)]
    pub extra_bath: BathCfg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCfg {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpParams {
    pub freq1_hz: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Coupling in rad/s.
    pub g: f64,
    /// Feedline coupling of mode 1; defaults to all of `kappa1`.
    #[serde(default)]
    pub kappa_ext: Option<f64>,
    pub freq2_max_hz: f64,
    pub probe: ProbeCfg,
}

fn default_z0() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineCouplingCfg {
    /// Give either the capacitance or the resulting rate.
    #[serde(default)]
    pub c_coupling: Option<f64>,
    #[serde(default)]
    pub gamma_tr: Option<f64>,
    #[serde(default = "default_z0")]
    pub z0: f64,
    pub l_res: f64,
    pub c_per_len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    pub junction: JunctionCfg,
    /// The resonator; its frequency is the emission frequency.
    pub mode: ModeCfg,
    #[serde(default)]
    pub device: DeviceCfg,
    pub line: LineCouplingCfg,
    pub line_temp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalRatesCfg {
    pub gamma_tr: f64,
    pub gamma_t_bar: f64,
    #[serde(default)]
    pub gamma_x: f64,
    #[serde(default)]
    pub n_tr: f64,
    #[serde(default)]
    pub n_x: f64,
    pub freq_hz: f64,
    pub delta_uev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainCfg {
    pub gain: f64,
    pub t_noise: f64,
    pub bandwidth: f64,
}

fn default_reads() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateParams {
    pub rates: CalRatesCfg,
    /// Injected chain, used to synthesize the measured powers.
    pub chain: ChainCfg,
    /// Standard deviation of additive Gaussian noise on each reading (W).
    #[serde(default)]
    pub noise_sigma: f64,
    /// Readings averaged for the zero-bias output power.
    #[serde(default = "default_reads")]
    pub zero_bias_reads: usize,
}

fn default_volume() -> f64 {
    1e-19
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalParams {
    pub t0: f64,
    #[serde(default)]
    pub p_const: f64,
    /// Give `a_coeff` or `ep_sigma`; the other is derived.
    #[serde(default)]
    pub a_coeff: Option<f64>,
    #[serde(default)]
    pub ep_sigma: Option<f64>,
    #[serde(default = "default_volume")]
    pub volume: f64,
}

impl ThermalParams {
    pub fn build(&self) -> ThermalNetwork {
        match (self.a_coeff, self.ep_sigma) {
            (_, Some(ep_sigma)) => ThermalNetwork {
                t0: self.t0,
                p_const: self.p_const,
                ep_sigma,
                volume: self.volume,
            },
            (Some(a), None) => ThermalNetwork::from_a_coeff(a, self.t0, self.p_const, self.volume),
            (None, None) => unreachable!("validated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    SweepBias(BiasParams),
    RfSweep(RfParams),
    LambShift(LambParams),
    ResetSim(ResetParams),
    EpMap(EpParams),
    Source(SourceParams),
    Calibrate(CalibrateParams),
    Thermal(ThermalParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Sweep axis: either `{start, stop, points, spacing}` or explicit `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Grid {
    pub fn range(start: f64, stop: f64, points: usize) -> Self {
        Self {
            start: Some(start),
            stop: Some(stop),
            points: Some(points),
            spacing: Spacing::Linear,
            values: None,
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self {
            start: None,
            stop: None,
            points: None,
            spacing: Spacing::Linear,
            values: Some(values),
        }
    }

    fn validate(&self) -> Result<()> {
        match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => {
                need(!v.is_empty(), "grid.values", "must not be empty")?;
                need(v.iter().all(|x| x.is_finite()), "grid.values", "must be finite")?;
                need(v.windows(2).all(|w| w[1] > w[0]), "grid.values", "must be strictly increasing")
            }
            (None, Some(a), Some(b), Some(n)) => {
                need(a.is_finite() && b.is_finite(), "grid.start", "start and stop must be finite")?;
                need(n >= 1, "grid.points", "must be at least 1")?;
                need(n == 1 || b > a, "grid.stop", "must exceed start")?;
                if self.spacing == Spacing::Log {
                    need(a > 0.0, "grid.start", "must be positive for log spacing")?;
                }
                Ok(())
            }
            _ => Err(CliError::Config(
                "grid: give either `values` or all of `start`, `stop`, `points`".into(),
            )),
        }
    }

    pub fn len(&self) -> usize {
        self.values.as_ref().map_or(self.points.unwrap_or(0), Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values in increasing order.
    pub fn to_vec(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let (a, b, n) = (self.start.unwrap_or(0.0), self.stop.unwrap_or(0.0), self.points.unwrap_or(0));
        if n == 1 {
            return vec![a];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return b;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => a + (b - a) * t,
                    Spacing::Log => a * (b / a).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub command: Command,
    pub params: Params,
    pub grid: Grid,
    pub out_path: Option<PathBuf>,
}

impl SweepConfig {
    /// Parses, fills defaults and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let obj = v.as_object().ok_or_else(|| CliError::Config("top level must be an object".into()))?;
        for key in obj.keys() {
            need(
                matches!(key.as_str(), "command" | "params" | "grid" | "out_path"),
                key,
                "unknown field (expected command, params, grid, out_path)",
            )?;
        }
        let command: Command = section(obj.get("command"), "command")?;
        let p = obj.get("params");
        let params = match command {
            Command::SweepBias => Params::SweepBias(section(p, "params")?),
            Command::RfSweep => Params::RfSweep(section(p, "params")?),
            Command::LambShift => Params::LambShift(section(p, "params")?),
            Command::ResetSim => Params::ResetSim(section(p, "params")?),
            Command::EpMap => Params::EpMap(section(p, "params")?),
            Command::Source => Params::Source(section(p, "params")?),
            Command::Calibrate => Params::Calibrate(section(p, "params")?),
            Command::Thermal => Params::Thermal(section(p, "params")?),
        };
        let grid: Grid = section(obj.get("grid"), "grid")?;
        let out_path = match obj.get("out_path") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
            Some(_) => return Err(CliError::Config("out_path: must be a nonempty string".into())),
        };
        let mut cfg = Self {
            command,
            params,
            grid,
            out_path,
        };
        cfg.validate()?;
        cfg.resolve();
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let axis = self.grid.to_vec();
        let first = axis[0];
        match &self.params {
            Params::SweepBias(p) => {
                p.junction.validate("params.junction")?;
                p.mode.validate("params.mode")?;
                p.device.validate("params.device")
            }
            Params::RfSweep(p) => {
                p.junction.validate("params.junction")?;
                p.primary.validate("params.primary")?;
                p.supporting.validate("params.supporting")?;
                p.device.validate("params.device")?;
                need(p.bias_norm.is_finite(), "params.bias_norm", "must be finite")?;
                need(p.l_max >= 1 && p.l_max <= 64, "params.l_max", "must lie in [1, 64]")?;
                need(first >= 0.0, "grid", "photon numbers must be nonnegative")
            }
            Params::LambShift(p) => {
                p.junction.validate("params.junction")?;
                p.mode.validate("params.mode")?;
                p.device.validate("params.device")?;
                need(p.spectrum.points >= 101, "params.spectrum.points", "must be at least 101")?;
                need(
                    p.spectrum.span >= qcrlab_core::lamb::COVERAGE && p.spectrum.span.is_finite(),
                    "params.spectrum.span",
                    "must be at least 50",
                )
            }
            Params::ResetSim(p) => {
                p.junction.validate("params.junction")?;
                p.mode.validate("params.mode")?;
                p.device.validate("params.device")?;
                need(p.bias_norm.is_finite(), "params.bias_norm", "must be finite")?;
                need(p.n_cut >= 2, "params.n_cut", "must be at least 2")?;
                nonnegative(p.init.n, "params.init.n")?;
                if p.init.kind == InitKind::Fock {
                    need(
                        p.init.n.fract() == 0.0 && (p.init.n as usize) < p.n_cut,
                        "params.init.n",
                        "must be an integer below n_cut",
                    )?;
                }
                nonnegative(p.extra_bath.gamma, "params.extra_bath.gamma")?;
                nonnegative(p.extra_bath.n_th, "params.extra_bath.n_th")?;
                need(first >= 0.0, "grid", "times must be nonnegative")
            }
            Params::EpMap(p) => {
                positive(p.freq1_hz, "params.freq1_hz")?;
                nonnegative(p.kappa1, "params.kappa1")?;
                nonnegative(p.kappa2, "params.kappa2")?;
                positive(p.g, "params.g")?;
                if let Some(k) = p.kappa_ext {
                    need(k >= 0.0 && k <= p.kappa1, "params.kappa_ext", "must lie in [0, kappa1]")?;
                }
                positive(p.freq2_max_hz, "params.freq2_max_hz")?;
                positive(p.probe.start_hz, "params.probe.start_hz")?;
                need(p.probe.stop_hz > p.probe.start_hz, "params.probe.stop_hz", "must exceed start_hz")?;
                need(p.probe.points >= 2, "params.probe.points", "must be at least 2")
            }
            Params::Source(p) => {
                p.junction.validate("params.junction")?;
                p.mode.validate("params.mode")?;
                p.device.validate("params.device")?;
                let l = &p.line;
                match (l.c_coupling, l.gamma_tr) {
                    (Some(c), None) => positive(c, "params.line.c_coupling")?,
                    (None, Some(g)) => positive(g, "params.line.gamma_tr")?,
                    _ => return Err(CliError::Config("params.line: give exactly one of c_coupling, gamma_tr".into())),
                }
                positive(l.z0, "params.line.z0")?;
                positive(l.l_res, "params.line.l_res")?;
                positive(l.c_per_len, "params.line.c_per_len")?;
                positive(p.line_temp, "params.line_temp")
            }
            Params::Calibrate(p) => {
                let r = &p.rates;
                positive(r.gamma_tr, "params.rates.gamma_tr")?;
                positive(r.gamma_t_bar, "params.rates.gamma_t_bar")?;
                nonnegative(r.gamma_x, "params.rates.gamma_x")?;
                nonnegative(r.n_tr, "params.rates.n_tr")?;
                nonnegative(r.n_x, "params.rates.n_x")?;
                positive(r.freq_hz, "params.rates.freq_hz")?;
                positive(r.delta_uev, "params.rates.delta_uev")?;
                positive(p.chain.gain, "params.chain.gain")?;
                nonnegative(p.chain.t_noise, "params.chain.t_noise")?;
                positive(p.chain.bandwidth, "params.chain.bandwidth")?;
                nonnegative(p.noise_sigma, "params.noise_sigma")?;
                need(p.zero_bias_reads >= 1, "params.zero_bias_reads", "must be at least 1")?;
                need(first > 0.0, "grid", "biases must be positive")?;
                need(self.grid.len() >= 3, "grid", "needs at least three biases")
            }
            Params::Thermal(p) => {
                positive(p.t0, "params.t0")?;
                nonnegative(p.p_const, "params.p_const")?;
                positive(p.volume, "params.volume")?;
                match (p.a_coeff, p.ep_sigma) {
                    (Some(a), None) => nonnegative(a, "params.a_coeff")?,
                    (None, Some(s)) => nonnegative(s, "params.ep_sigma")?,
                    _ => return Err(CliError::Config("params: give exactly one of a_coeff, ep_sigma".into())),
                }
                p.build().validate().map_err(|e| core_error("params", e))?;
                need(first > 0.0, "grid", "temperatures must be positive")
            }
        }
    }

    /// Replaces every derived or omitted value with the one the run uses.
    fn resolve(&mut self) {
        let last = *self.grid.to_vec().last().expect("validated grid");
        match &mut self.params {
            Params::SweepBias(p) => p.mode.resolve(),
            Params::RfSweep(p) => {
                p.primary.resolve();
                p.supporting.resolve();
                if p.fock_cut.is_none() {
                    let auto = match p.statistics {
                        Statistics::Coherent => qcrlab_core::spectrum::DriveState::coherent_auto(last, p.l_max).fock_cut,
                        // Geometric tail: n̄(1 + ln(1/ε)) covers all but ε of the mass.
                        Statistics::Thermal => ((last + 1.0) * 20.0).ceil() as usize + p.l_max,
                    };
                    p.fock_cut = Some(auto);
                }
            }
            Params::LambShift(p) => p.mode.resolve(),
            Params::ResetSim(p) => p.mode.resolve(),
            Params::EpMap(p) => {
                p.kappa_ext.get_or_insert(p.kappa1);
            }
            Params::Source(p) => {
                p.mode.resolve();
                let src = qcrlab_core::source_calib::PhotonSourceParams {
                    c_coupling: p.line.c_coupling.unwrap_or(1.0),
                    omega0: TAU * p.mode.freq_hz,
                    z0: p.line.z0,
                    l_res: p.line.l_res,
                    c_per_len: p.line.c_per_len,
                };
                match (p.line.c_coupling, p.line.gamma_tr) {
                    (Some(_), _) => p.line.gamma_tr = Some(src.coupling_rate()),
                    (None, Some(g)) => p.line.c_coupling = Some(src.with_coupling_rate(g).c_coupling),
                    (None, None) => {}
                }
            }
            Params::Calibrate(_) => {}
            Params::Thermal(p) => {
                let net = p.build();
                p.ep_sigma = Some(net.ep_sigma);
                p.a_coeff = Some(net.a_coeff());
            }
        }
    }
}
