//! Measurement protocols built on [`run_cycles`].

use serde::{Deserialize, Serialize};

use super::config::{derive_seed, detuned_pump_offset, SignalSource, SimulationConfig};
use super::engine::run_cycles;
use super::trace::{ClickCause, ClickTrace};
use crate::error::{positive, Error, Result};

/// Fraction of wall time spent detecting: T_d × cycles / wall time.
pub fn duty_cycle_estimate(trace: &ClickTrace) -> Result<f64> {
    if trace.total_cycles == 0 || !(trace.total_wall_time > 0.0) {
        return Err(Error::invalid("trace", "empty trace"));
    }
    Ok(trace.t_d * trace.total_cycles as f64 / trace.total_wall_time)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyMeasurement {
    pub efficiency: f64,
    pub sigma: f64,
    pub click_rate: f64,
    pub dark_rate: f64,
}

/// (click rate − dark rate) / `flux_calibration`.
///
/// `config` carries the true source; `flux_calibration` is the flux the
/// experimenter believes is incident (e.g. from a Ramsey calibration). The
/// dark rate comes from an independent run with the source switched off.
pub fn measure_efficiency(config: &SimulationConfig, flux_calibration: f64) -> Result<EfficiencyMeasurement> {
    positive("flux_calibration", flux_calibration)?;
    if !matches!(config.signal, SignalSource::Coherent { .. }) {
        return Err(Error::invalid("signal", "efficiency measurement needs a coherent source"));
    }
    let on = run_cycles(config)?;
    let off_cfg = config
        .with_signal(SignalSource::None)
        .with_seed(derive_seed(config.rng_seed, 0xDA4C));
    let off = run_cycles(&off_cfg)?;
    let (r_on, r_off) = (on.rate(), off.rate());
    let var = r_on / on.total_wall_time.max(f64::MIN_POSITIVE) + r_off / off.total_wall_time.max(f64::MIN_POSITIVE);
    Ok(EfficiencyMeasurement {
        efficiency: (r_on - r_off) / flux_calibration,
        sigma: var.sqrt() / flux_calibration,
        click_rate: r_on,
        dark_rate: r_off,
    })
}

/// Efficiency at each signal frequency; point `i` uses seed `derive_seed(seed, i)`.
pub fn efficiency_sweep(config: &SimulationConfig, flux: f64, omegas: &[f64]) -> Result<Vec<(f64, EfficiencyMeasurement)>> {
    omegas
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let c = config
                .with_signal(SignalSource::Coherent { flux, omega: w })
                .with_seed(derive_seed(config.rng_seed, i as u64));
            measure_efficiency(&c, flux).map(|m| (w, m))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluorescenceHistogram {
    /// (bin centre in seconds after the π pulse, counts).
    pub bins: Vec<(f64, f64)>,
    pub bin_width: f64,
    pub repetitions: usize,
    pub trace_rate: f64,
}

/// Repeats spin excitation `n_repetitions` times and histograms clicks by time since the pulse.
pub fn run_fluorescence(config: &SimulationConfig, n_repetitions: usize, bin_width: f64) -> Result<FluorescenceHistogram> {
    let SignalSource::Spin(spin) = config.signal else {
        return Err(Error::invalid("signal", "fluorescence needs a spin source"));
    };
    positive("bin_width", bin_width)?;
    if bin_width < config.timing.cycle_duration() {
        return Err(Error::invalid(
            "bin_width",
            format!("{bin_width} s is shorter than one cycle ({} s)", config.timing.cycle_duration()),
        ));
    }
    if n_repetitions == 0 {
        return Err(Error::invalid("n_repetitions", "at least one repetition"));
    }
    let cfg = config.with_duration(spin.pulse_period * n_repetitions as f64);
    let trace = run_cycles(&cfg)?;
    let n_bins = (spin.pulse_period / bin_width).floor() as usize;
    let mut counts = vec![0.0; n_bins];
    for c in &trace.clicks {
        if let Some(dt) = c.since_pulse {
            let k = (dt / bin_width).floor();
            if k >= 0.0 && (k as usize) < n_bins {
                counts[k as usize] += 1.0;
            }
        }
    }
    Ok(FluorescenceHistogram {
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| ((i as f64 + 0.5) * bin_width, c))
            .collect(),
        bin_width,
        repetitions: n_repetitions,
        trace_rate: trace.rate(),
    })
}

/// Per-cause rates from one trace, s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelledRates {
    pub alpha_q: f64,
    pub alpha_p: f64,
    pub alpha_th: f64,
    pub signal: f64,
    pub readout_error: f64,
    pub total: f64,
}

impl LabelledRates {
    pub fn from_trace(t: &ClickTrace) -> Self {
        let c = t.counts();
        let w = t.total_wall_time.max(f64::MIN_POSITIVE);
        let r = |k| c.get(k) as f64 / w;
        Self {
            alpha_q: r(ClickCause::QubitThermal),
            alpha_p: r(ClickCause::PumpHeating),
            alpha_th: r(ClickCause::Thermal),
            signal: r(ClickCause::Signal),
            readout_error: r(ClickCause::ReadoutError),
            total: c.total() as f64 / w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkCountBudget {
    /// Cause labels of the tuned-pump trace.
    pub labelled: LabelledRates,
    pub rate_pump_off: f64,
    pub rate_detuned: f64,
    pub rate_tuned: f64,
    /// Protocol estimates: α_q = off, α_p = detuned − off, α_th = tuned − detuned.
    pub alpha_q: f64,
    pub alpha_p: f64,
    pub alpha_th: f64,
    pub duration: f64,
}

/// The three dark-count protocols derived from `config`.
pub fn protocol_configs(config: &SimulationConfig) -> [SimulationConfig; 3] {
    let base = config.with_signal(SignalSource::None);
    [
        base.pump_off().with_seed(derive_seed(config.rng_seed, 1)),
        base.pump_detuned(detuned_pump_offset()).with_seed(derive_seed(config.rng_seed, 2)),
        base.pump_detuned(0.0).with_seed(derive_seed(config.rng_seed, 3)),
    ]
}

/// Runs pump off / detuned / tuned and splits the dark rate into its causes.
pub fn dark_count_budget(config: &SimulationConfig) -> Result<DarkCountBudget> {
    if !matches!(config.signal, SignalSource::None) {
        return Err(Error::invalid("signal", "dark-count budget needs the source off"));
    }
    let [off, det, tuned] = protocol_configs(config);
    let t_off = run_cycles(&off)?;
    let t_det = run_cycles(&det)?;
    let t_tuned = run_cycles(&tuned)?;
    let (r0, r1, r2) = (t_off.rate(), t_det.rate(), t_tuned.rate());
    Ok(DarkCountBudget {
        labelled: LabelledRates::from_trace(&t_tuned),
        rate_pump_off: r0,
        rate_detuned: r1,
        rate_tuned: r2,
        alpha_q: r0,
        alpha_p: r1 - r0,
        alpha_th: r2 - r1,
        duration: config.duration,
    })
}
