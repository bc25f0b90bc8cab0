//! Flat, unit-suffixed parameter files.
//!
//! Every key is a parameter name followed by a unit suffix, e.g.
//! `omega_b_ghz = 7.7` or `t1_us = 70`. Frequencies are written as f = ω/2π
//! and stored internally in rad/s; `_per_s` rates are stored as given.
//! Layers are applied in order: embedded defaults, file, environment
//! (`SMPD_<KEY>`), then `--set key=value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use smpd_core::constants::{ghz, hz, khz, mhz};
use smpd_core::sim::{ResetMode, SpinSource};
use smpd_core::{CycleTiming, DeviceParams, NoiseEnvironment, SimulationConfig, TuningState};

pub const DEVICE_DEFAULTS: &str = include_str!("../configs/device-defaults.toml");
pub const ENV_PREFIX: &str = "SMPD_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Frequency,
    /// Linewidths: frequency units or a raw rate in s⁻¹.
    Linewidth,
    Rate,
    Time,
    Temperature,
    Number,
    Count,
}

impl Family {
    fn suffixes(self) -> &'static [&'static str] {
        match self {
            Family::Frequency => &["ghz", "mhz", "khz", "hz"],
            Family::Linewidth => &["ghz", "mhz", "khz", "hz", "per_s"],
            Family::Rate => &["per_s"],
            Family::Time => &["s", "ms", "us", "ns"],
            Family::Temperature => &["k", "mk"],
            Family::Number | Family::Count => &[],
        }
    }

    fn describe(self) -> String {
        match self {
            Family::Number | Family::Count => "no unit suffix".into(),
            f => format!("one of _{}", f.suffixes().join(", _")),
        }
    }
}

// longest first so `per_s` wins over `s`
const ALL_SUFFIXES: [&str; 11] = ["per_s", "ghz", "mhz", "khz", "hz", "ms", "us", "ns", "mk", "s", "k"];

/// v·10^k rounded once, so `0.8` µs gives the same f64 as `0.8e-6`.
fn shift_decimal(v: f64, k: i32) -> f64 {
    let s = format!("{v:e}");
    match s.split_once('e') {
        Some((m, e)) if v.is_finite() => {
            let e: i32 = e.parse().unwrap_or(0);
            format!("{m}e{}", e + k).parse().unwrap_or(v * 10f64.powi(k))
        }
        _ => v * 10f64.powi(k),
    }
}

fn to_si(suffix: &str, v: f64) -> f64 {
    match suffix {
        "ghz" => ghz(v),
        "mhz" => mhz(v),
        "khz" => khz(v),
        "hz" => hz(v),
        "ms" | "mk" => shift_decimal(v, -3),
        "us" => shift_decimal(v, -6),
        "ns" => shift_decimal(v, -9),
        _ => v,
    }
}

const KEYS: &[(&str, Family)] = &[
    ("omega_b", Family::Frequency),
    ("omega_w", Family::Frequency),
    ("omega_q", Family::Frequency),
    ("omega_pb", Family::Frequency),
    ("omega_pw", Family::Frequency),
    ("kappa_b_c", Family::Linewidth),
    ("kappa_b_i", Family::Linewidth),
    ("kappa_w", Family::Linewidth),
    ("kappa_pb", Family::Linewidth),
    ("kappa_pw", Family::Linewidth),
    ("chi_b", Family::Linewidth),
    ("chi_w", Family::Linewidth),
    ("t1", Family::Time),
    ("t2_star", Family::Time),
    ("f_ro", Family::Number),
    ("p_th_q", Family::Number),
    ("phi_b", Family::Number),
    ("phi_pb", Family::Number),
    ("cooperativity", Family::Number),
    ("delta_p", Family::Frequency),
    ("kappa_d", Family::Linewidth),
    ("t_d", Family::Time),
    ("t_ro", Family::Time),
    ("t_reset_unit", Family::Time),
    ("mean_resets_per_cycle", Family::Number),
    ("field_temperature", Family::Temperature),
    ("n_th_b", Family::Number),
    ("qubit_temperature", Family::Temperature),
    ("cryostat_temperature", Family::Temperature),
    ("alpha_p", Family::Rate),
    ("duration", Family::Time),
    ("readout_false_positive", Family::Number),
    ("reset_f_pi", Family::Number),
    ("reset_max_rounds", Family::Count),
    ("eta_measured", Family::Number),
    ("sweep_flux", Family::Rate),
    ("sweep_kappa_b_narrow", Family::Linewidth),
    ("sweep_kappa_b_wide", Family::Linewidth),
    ("sweep_kappa_d_narrow", Family::Linewidth),
    ("sweep_kappa_d_wide", Family::Linewidth),
    ("sweep_points", Family::Count),
    ("sweep_duration", Family::Time),
    ("dark_duration", Family::Time),
    ("temperature_scan_n_th_field", Family::Number),
    ("bandwidth_scan_n_th_field", Family::Number),
    ("bandwidth_scan_duration", Family::Time),
    ("spin_lifetime", Family::Time),
    ("spin_eta_reso", Family::Number),
    ("spin_eta_loss", Family::Number),
    ("spin_pulse_period", Family::Time),
    ("spin_excess_background", Family::Rate),
    ("fluorescence_kappa_d", Family::Linewidth),
    ("fluorescence_repetitions", Family::Count),
    ("fluorescence_bin_width", Family::Time),
    ("tuning_noise", Family::Linewidth),
    ("fwm_noise", Family::Number),
    ("source_linewidth", Family::Linewidth),
    ("opt_kappa_d_min", Family::Linewidth),
    ("opt_kappa_d_max", Family::Linewidth),
    ("opt_t_d_min", Family::Time),
    ("opt_t_d_max", Family::Time),
    ("opt_alpha_err", Family::Rate),
];

fn family_of(base: &str) -> Option<Family> {
    KEYS.iter().find(|(k, _)| *k == base).map(|(_, f)| *f)
}

/// Names accepted in parameter files, with their unit families.
pub fn known_keys() -> Vec<(String, String)> {
    KEYS.iter().map(|(k, f)| (k.to_string(), f.describe())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Defaults,
    File(String),
    Environment,
    CommandLine,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Defaults => f.write_str("built-in defaults"),
            Origin::File(p) => f.write_str(p),
            Origin::Environment => f.write_str("environment"),
            Origin::CommandLine => f.write_str("--set"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{origin}: {message}")]
    Parse { origin: Origin, message: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { key: String, origin: Origin },
    #[error("{origin}: key `{key}` has the wrong unit, expected {expected}")]
    UnitMismatch { key: String, expected: String, origin: Origin },
    #[error("{origin}: key `{key}` must be a number")]
    NotANumber { key: String, origin: Origin },
    #[error("{origin}: `{key}` conflicts with `{other}` set in the same layer")]
    Duplicate { key: String, other: String, origin: Origin },
    #[error("invalid `{key}` ({origin}): {reason}")]
    Invalid { key: String, origin: Origin, reason: String },
}

#[derive(Debug, Clone)]
struct Entry {
    value: f64,
    key: String,
    origin: Origin,
}

/// Splits `key` into (parameter name, unit suffix) and checks the unit.
fn resolve_key(key: &str, origin: &Origin) -> Result<(&'static str, Option<&'static str>), ConfigError> {
    if let Some((base, fam)) = KEYS.iter().find(|(k, _)| *k == key) {
        return match fam {
            Family::Number | Family::Count => Ok((base, None)),
            f => Err(ConfigError::UnitMismatch {
                key: key.into(),
                expected: f.describe(),
                origin: origin.clone(),
            }),
        };
    }
    for sfx in ALL_SUFFIXES {
        let Some(stem) = key.strip_suffix(sfx).and_then(|s| s.strip_suffix('_')) else {
            continue;
        };
        if let Some((base, fam)) = KEYS.iter().find(|(k, _)| *k == stem) {
            if let Some(s) = fam.suffixes().iter().find(|s| **s == sfx) {
                return Ok((base, Some(s)));
            }
            return Err(ConfigError::UnitMismatch {
                key: key.into(),
                expected: fam.describe(),
                origin: origin.clone(),
            });
        }
    }
    Err(ConfigError::UnknownKey { key: key.into(), origin: origin.clone() })
}

/// Accumulated parameter values in SI units, keyed by parameter name.
#[derive(Debug, Clone, Default)]
pub struct ParameterSet {
    entries: BTreeMap<&'static str, Entry>,
}

impl ParameterSet {
    /// The embedded defaults.
    pub fn defaults() -> Self {
        let mut p = Self::default();
        p.apply_toml(DEVICE_DEFAULTS, Origin::Defaults).expect("embedded defaults parse");
        p
    }

    fn layer(&mut self, items: Vec<(String, f64)>, origin: Origin) -> Result<(), ConfigError> {
        let mut seen: BTreeMap<&'static str, String> = BTreeMap::new();
        for (key, v) in items {
            let (base, sfx) = resolve_key(&key, &origin)?;
            if let Some(prev) = seen.insert(base, key.clone()) {
                return Err(ConfigError::Duplicate { key, other: prev, origin });
            }
            if family_of(base) == Some(Family::Count) && !(v >= 0.0 && v.fract() == 0.0) {
                return Err(ConfigError::Invalid {
                    key,
                    origin,
                    reason: format!("must be a non-negative integer, got {v}"),
                });
            }
            let value = sfx.map_or(v, |s| to_si(s, v));
            self.entries.insert(base, Entry { value, key, origin: origin.clone() });
        }
        Ok(())
    }

    pub fn apply_toml(&mut self, text: &str, origin: Origin) -> Result<(), ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse {
            origin: origin.clone(),
            message: e.message().to_string(),
        })?;
        let mut items = Vec::new();
        for (k, v) in table {
            let x = match v {
                toml::Value::Float(f) => f,
                toml::Value::Integer(i) => i as f64,
                _ => {
                    // distinguish misspelt keys from wrong value types
                    resolve_key(&k, &origin)?;
                    return Err(ConfigError::NotANumber { key: k, origin });
                }
            };
            items.push((k, x));
        }
        self.layer(items, origin)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_toml(&text, Origin::File(path.display().to_string()))
    }

    /// Applies `SMPD_<KEY>=<value>` pairs; other variables are ignored.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut items = Vec::new();
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            let key = key.to_ascii_lowercase();
            let v = value.trim().parse::<f64>().map_err(|_| ConfigError::NotANumber {
                key: key.clone(),
                origin: Origin::Environment,
            })?;
            items.push((key, v));
        }
        items.sort_by(|a, b| a.0.cmp(&b.0));
        self.layer(items, Origin::Environment)
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), ConfigError> {
        let mut items = Vec::new();
        for o in overrides {
            let Some((k, v)) = o.split_once('=') else {
                return Err(ConfigError::Parse {
                    origin: Origin::CommandLine,
                    message: format!("expected key=value, got `{o}`"),
                });
            };
            let key = k.trim().to_string();
            let v = v.trim().parse::<f64>().map_err(|_| ConfigError::NotANumber {
                key: key.clone(),
                origin: Origin::CommandLine,
            })?;
            items.push((key, v));
        }
        self.layer(items, Origin::CommandLine)
    }

    pub fn get(&self, base: &str) -> Option<f64> {
        self.entries.get(base).map(|e| e.value)
    }

    fn req(&self, base: &'static str) -> Result<f64, ConfigError> {
        self.get(base).ok_or_else(|| ConfigError::Invalid {
            key: base.into(),
            origin: Origin::Defaults,
            reason: "missing".into(),
        })
    }

    fn blame(&self, base: &str, reason: String) -> ConfigError {
        match self.entries.get(base) {
            Some(e) => ConfigError::Invalid { key: e.key.clone(), origin: e.origin.clone(), reason },
            None => ConfigError::Invalid { key: base.into(), origin: Origin::Defaults, reason },
        }
    }

    /// Builds and validates the full configuration.
    pub fn build(&self) -> Result<Config, ConfigError> {
        let r = |k| self.req(k);
        let device = DeviceParams {
            omega_b: r("omega_b")?,
            omega_w: r("omega_w")?,
            omega_q: r("omega_q")?,
            omega_pb: r("omega_pb")?,
            omega_pw: r("omega_pw")?,
            kappa_b_c: r("kappa_b_c")?,
            kappa_b_i: r("kappa_b_i")?,
            kappa_w: r("kappa_w")?,
            kappa_pb: r("kappa_pb")?,
            kappa_pw: r("kappa_pw")?,
            chi_b: r("chi_b")?,
            chi_w: r("chi_w")?,
            t1: r("t1")?,
            t2_star: r("t2_star")?,
            f_ro: r("f_ro")?,
            p_th_q: r("p_th_q")?,
        };
        self.check(device.validate())?;
        let c = r("cooperativity")?;
        if !(c >= 0.0) {
            return Err(self.blame("cooperativity", format!("must be non-negative, got {c}")));
        }
        let tuning = TuningState {
            phi_b: r("phi_b")?,
            phi_pb: r("phi_pb")?,
            xi0: device.xi0_for(c),
            delta_p: r("delta_p")?,
            cooperativity: c,
            kappa_d: self.get("kappa_d"),
        };
        let timing = CycleTiming {
            t_d: r("t_d")?,
            t_ro: r("t_ro")?,
            t_reset_unit: r("t_reset_unit")?,
            mean_resets_per_cycle: r("mean_resets_per_cycle")?,
        };
        let noise = NoiseEnvironment {
            field_temperature: r("field_temperature")?,
            n_th_b: self.get("n_th_b"),
            qubit_temperature: r("qubit_temperature")?,
            cryostat_temperature: r("cryostat_temperature")?,
            alpha_p: r("alpha_p")?,
        };
        let reset = match (self.get("reset_f_pi"), self.get("reset_max_rounds")) {
            (None, None) => ResetMode::Ideal,
            (f_pi, rounds) => ResetMode::Imperfect {
                f_pi: f_pi.unwrap_or(1.0),
                max_rounds: rounds.unwrap_or(1.0) as u32,
            },
        };
        let sim = SimulationConfig {
            device,
            tuning,
            timing,
            noise,
            signal: smpd_core::SignalSource::None,
            duration: r("duration")?,
            rng_seed: 0,
            reset,
            readout_false_positive: r("readout_false_positive")?,
        };
        self.check(sim.validate())?;

        let spin = SpinSource {
            gamma_r: 1.0 / self.positive("spin_lifetime")?,
            eta_reso: self.fraction("spin_eta_reso")?,
            eta_loss: self.fraction("spin_eta_loss")?,
            pulse_period: self.positive("spin_pulse_period")?,
            excitation_probability: 1.0,
            excess_background: self.non_negative("spin_excess_background")?,
        };
        let scenario = ScenarioParams {
            eta_measured: self.fraction("eta_measured")?,
            sweep_flux: self.positive("sweep_flux")?,
            sweep_kappa_b: [self.positive("sweep_kappa_b_narrow")?, self.positive("sweep_kappa_b_wide")?],
            sweep_kappa_d: [self.positive("sweep_kappa_d_narrow")?, self.positive("sweep_kappa_d_wide")?],
            sweep_points: self.count("sweep_points", 8)?,
            sweep_duration: self.positive("sweep_duration")?,
            dark_duration: self.positive("dark_duration")?,
            temperature_scan_n_th_field: self.positive("temperature_scan_n_th_field")?,
            bandwidth_scan_n_th_field: self.positive("bandwidth_scan_n_th_field")?,
            bandwidth_scan_duration: self.positive("bandwidth_scan_duration")?,
            spin,
            fluorescence_kappa_d: self.positive("fluorescence_kappa_d")?,
            fluorescence_repetitions: self.count("fluorescence_repetitions", 1)?,
            fluorescence_bin_width: self.positive("fluorescence_bin_width")?,
            tuning_noise: self.non_negative("tuning_noise")?,
            fwm_noise: self.non_negative("fwm_noise")?,
            source_linewidth: self.non_negative("source_linewidth")?,
            opt_kappa_d: (self.positive("opt_kappa_d_min")?, self.positive("opt_kappa_d_max")?),
            opt_t_d: (self.positive("opt_t_d_min")?, self.positive("opt_t_d_max")?),
            opt_alpha_err: match self.get("opt_alpha_err") {
                Some(_) => Some(self.non_negative("opt_alpha_err")?),
                None => None,
            },
        };
        Ok(Config { sim, scenario })
    }

    fn check(&self, r: smpd_core::Result<()>) -> Result<(), ConfigError> {
        r.map_err(|e| {
            let name = match &e {
                smpd_core::Error::Domain { name, .. } | smpd_core::Error::InvalidParameter { name, .. } => name.to_string(),
                _ => String::new(),
            };
            // core names some checks after struct fields that are not file keys
            let base = match name.as_str() {
                "xi0" => "cooperativity",
                "f_pi" => "reset_f_pi",
                "max_rounds" => "reset_max_rounds",
                other => other,
            };
            self.blame(base, e.to_string())
        })
    }

    fn positive(&self, k: &'static str) -> Result<f64, ConfigError> {
        let v = self.req(k)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.blame(k, format!("must be positive, got {v}")))
        }
    }

    fn non_negative(&self, k: &'static str) -> Result<f64, ConfigError> {
        let v = self.req(k)?;
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.blame(k, format!("must be non-negative, got {v}")))
        }
    }

    fn fraction(&self, k: &'static str) -> Result<f64, ConfigError> {
        let v = self.req(k)?;
        if v > 0.0 && v <= 1.0 {
            Ok(v)
        } else {
            Err(self.blame(k, format!("must lie in (0, 1], got {v}")))
        }
    }

    fn count(&self, k: &'static str, min: usize) -> Result<usize, ConfigError> {
        let v = self.req(k)? as usize;
        if v >= min {
            Ok(v)
        } else {
            Err(self.blame(k, format!("must be at least {min}, got {v}")))
        }
    }
}

/// Settings used by individual scenarios. Rates in rad/s, times in s.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioParams {
    /// On-resonance efficiency the effective readout fidelity is calibrated to.
    pub eta_measured: f64,
    pub sweep_flux: f64,
    pub sweep_kappa_b: [f64; 2],
    pub sweep_kappa_d: [f64; 2],
    pub sweep_points: usize,
    pub sweep_duration: f64,
    pub dark_duration: f64,
    pub temperature_scan_n_th_field: f64,
    pub bandwidth_scan_n_th_field: f64,
    pub bandwidth_scan_duration: f64,
    pub spin: SpinSource,
    pub fluorescence_kappa_d: f64,
    pub fluorescence_repetitions: usize,
    pub fluorescence_bin_width: f64,
    pub tuning_noise: f64,
    pub fwm_noise: f64,
    pub source_linewidth: f64,
    pub opt_kappa_d: (f64, f64),
    pub opt_t_d: (f64, f64),
    pub opt_alpha_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub sim: SimulationConfig,
    pub scenario: ScenarioParams,
}

/// Defaults, then the file at `path`.
pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let mut p = ParameterSet::defaults();
    p.apply_file(path)?;
    p.build()
}

/// Defaults, optional file, process environment and overrides.
pub fn load_layered(path: Option<&Path>, overrides: &[String]) -> Result<Config, ConfigError> {
    let mut p = ParameterSet::defaults();
    if let Some(path) = path {
        p.apply_file(path)?;
    }
    p.apply_env(std::env::vars())?;
    p.apply_overrides(overrides)?;
    p.build()
}
