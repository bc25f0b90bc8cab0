use rayon::prelude::*;
use smpd_core::constants::{khz, mhz, to_hz};
use smpd_core::figures::{alpha_q_detected, k_q_detected};
use smpd_core::fit::{fit_linear, fit_thermal_model, RatePoint, ThermalBranch};
use smpd_core::search::linspace;
use smpd_core::sim::{
    dark_count_budget, derive_seed, expected_rates, protocol_configs, run_cycles, ClickTrace, LabelledRates,
};
use smpd_core::{bose_einstein, eta_smpd, figure_of_merit, temperature_from_occupation, SignalSource, SimulationConfig};

use super::{Context, ScenarioError, ScenarioKind};
use crate::config::Config;
use crate::report::{Curve, ScenarioOutput};

const KIND_T: ScenarioKind = ScenarioKind::DarkVsTemperature;
const KIND_B: ScenarioKind = ScenarioKind::DarkVsBandwidth;
const KIND_C: ScenarioKind = ScenarioKind::ClickTraces;

/// Cryostat temperatures of the thermal scan, K.
pub const SCAN_TEMPERATURES: [f64; 5] = [0.010, 0.030, 0.050, 0.060, 0.090];
/// Hot rows of the dark-rate table, K, with their target ids.
const HOT_ROWS: [(f64, &str); 3] = [(0.050, "table_rate_50mk"), (0.060, "table_rate_60mk"), (0.090, "table_rate_90mk")];
const BANDWIDTH_POINTS: usize = 6;

/// Dark configuration whose buffer line carries `n` thermal photons at base temperature.
fn with_field_occupation(sim: &SimulationConfig, n: f64) -> smpd_core::Result<SimulationConfig> {
    let mut c = sim.with_signal(SignalSource::None);
    c.noise.n_th_b = None;
    c.noise.field_temperature = temperature_from_occupation(c.device.omega_b, n)?;
    Ok(c)
}

fn poisson_sigma(rate: f64, duration: f64) -> f64 {
    (rate.max(1.0 / duration) / duration).sqrt()
}

pub(super) fn dark_vs_temperature(config: &Config, seed: u64, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let dur = config.scenario.dark_duration;
    let base = with_field_occupation(&config.sim, config.scenario.temperature_scan_n_th_field)
        .ctx(KIND_T, "field occupation")?
        .with_duration(dur);
    let budgets = SCAN_TEMPERATURES
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut c = base.with_seed(derive_seed(seed, i as u64));
            c.noise.cryostat_temperature = t;
            dark_count_budget(&c)
        })
        .collect::<Result<Vec<_>, _>>()
        .ctx(KIND_T, "dark-count protocols")?;

    let (mut th, mut qb) = (Vec::new(), Vec::new());
    for (&t, b) in SCAN_TEMPERATURES.iter().zip(&budgets) {
        let s_th = (b.rate_tuned / dur + b.rate_detuned / dur).max(1.0 / (dur * dur)).sqrt();
        th.push(RatePoint { temperature: t, rate: b.alpha_th, sigma: Some(s_th) });
        qb.push(RatePoint { temperature: t, rate: b.rate_pump_off, sigma: Some(poisson_sigma(b.rate_pump_off, dur)) });
    }
    let d = &base.device;
    let f_th = fit_thermal_model(&th, ThermalBranch::Thermal, d.omega_b).ctx(KIND_T, "thermal fit")?;
    let f_q = fit_thermal_model(&qb, ThermalBranch::Qubit, d.omega_q).ctx(KIND_T, "qubit fit")?;

    let p0 = bose_einstein(d.omega_q, base.noise.qubit_temperature).ctx(KIND_T, "qubit population")?;
    let alpha_q0 = alpha_q_detected(p0, &base.timing, d.t1, d.f_ro).ctx(KIND_T, "alpha_q truth")?;
    let kq = k_q_detected(&base.timing, d.t1, d.f_ro).ctx(KIND_T, "K_q truth")?;

    let mut c = Curve::new(
        "rates",
        &[
            "temperature_k",
            "n_th",
            "p_th",
            "rate_off",
            "rate_detuned",
            "rate_tuned",
            "alpha_th",
            "sigma_th",
            "sigma_q",
            "fit_th",
            "fit_q",
        ],
    );
    for ((b, pt), pq) in budgets.iter().zip(&th).zip(&qb) {
        let t = pt.temperature;
        let n = bose_einstein(d.omega_b, t).unwrap_or(0.0);
        let p = bose_einstein(d.omega_q, t).unwrap_or(0.0);
        c.push(vec![
            t,
            n,
            p,
            b.rate_pump_off,
            b.rate_detuned,
            b.rate_tuned,
            b.alpha_th,
            pt.sigma.unwrap_or(0.0),
            pq.sigma.unwrap_or(0.0),
            f_th.rate_0 + f_th.k * n,
            f_q.rate_0 + f_q.k * p,
        ]);
    }
    out.curves.push(c);

    out.check("temp_alpha_th_0", f_th.rate_0, None, None);
    out.check("temp_k_th", f_th.k, None, None);
    out.check("temp_alpha_q_0", f_q.rate_0, Some(alpha_q0), None);
    out.check("temp_k_q", f_q.k, Some(kq), None);
    out.check("temp_alpha_q_0_reported", f_q.rate_0, None, None);
    out.check("temp_k_q_reported", f_q.k, None, None);
    Ok(())
}

pub(super) fn dark_vs_bandwidth(config: &Config, seed: u64, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let dur = config.scenario.bandwidth_scan_duration;
    let base = with_field_occupation(&config.sim, config.scenario.bandwidth_scan_n_th_field)
        .ctx(KIND_B, "field occupation")?
        .with_duration(dur);
    let kappas = linspace(khz(100.0), mhz(1.0), BANDWIDTH_POINTS);
    let rates = kappas
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let mut c = base.with_seed(derive_seed(seed, i as u64));
            c.tuning.kappa_d = Some(k);
            run_cycles(&c).map(|t| t.rate())
        })
        .collect::<Result<Vec<_>, _>>()
        .ctx(KIND_B, "tuned dark runs")?;
    let sig: Vec<f64> = rates.iter().map(|&r| poisson_sigma(r, dur)).collect();
    let fit = fit_linear(&kappas, &rates, Some(&sig)).ctx(KIND_B, "linear fit")?;

    let d = &base.device;
    let eta = eta_smpd(d, &base.tuning, &base.timing, d.omega_b).ctx(KIND_B, "efficiency")?.total;
    let slope_truth = eta * base.noise.n_th_b(d.omega_b) / 4.0;
    let fom = figure_of_merit(d, &base.tuning, &base.timing, &base.noise).ctx(KIND_B, "figure of merit")?;

    let (a, b) = (fit.value("intercept"), fit.value("slope"));
    let mut c = Curve::new("rates", &["kappa_d_hz", "kappa_d_rad_per_s", "rate", "sigma", "fit", "model"]);
    for ((&k, &r), &s) in kappas.iter().zip(&rates).zip(&sig) {
        c.push(vec![to_hz(k), k, r, s, a + b * k, fom.alpha_err + slope_truth * k]);
    }
    out.curves.push(c);

    out.check("bandwidth_slope", b, Some(slope_truth), None);
    out.check("bandwidth_intercept", a, Some(fom.alpha_err), None);
    out.check("bandwidth_slope_reported", b, None, None);
    out.check("bandwidth_intercept_reported", a, None, None);
    Ok(())
}

pub(super) fn click_traces(config: &Config, seed: u64, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let dur = config.scenario.dark_duration;
    let base = config.sim.with_signal(SignalSource::None).with_duration(dur).with_seed(seed);
    let mut cfgs: Vec<SimulationConfig> = protocol_configs(&base).to_vec();
    for (i, &(t, _)) in HOT_ROWS.iter().enumerate() {
        let mut c = protocol_configs(&base)[2].with_seed(derive_seed(seed, 10 + i as u64));
        c.noise.cryostat_temperature = t;
        cfgs.push(c);
    }
    let traces: Vec<ClickTrace> = cfgs
        .par_iter()
        .map(run_cycles)
        .collect::<Result<Vec<_>, _>>()
        .ctx(KIND_C, "click traces")?;

    let mut c = Curve::new(
        "rates",
        &[
            "cryostat_k",
            "pump",
            "duration_s",
            "rate",
            "sigma",
            "qubit_thermal",
            "pump_heating",
            "thermal",
            "readout_error",
            "expected",
        ],
    );
    for (i, (cfg, t)) in cfgs.iter().zip(&traces).enumerate() {
        let l = LabelledRates::from_trace(t);
        let e = expected_rates(cfg).ctx(KIND_C, "expected rates")?.total;
        let pump = i.min(2) as f64;
        c.push(vec![
            cfg.noise.cryostat_temperature,
            pump,
            t.total_wall_time,
            t.rate(),
            poisson_sigma(t.rate(), t.total_wall_time),
            l.alpha_q,
            l.alpha_p,
            l.alpha_th,
            l.readout_error,
            e,
        ]);
    }
    out.curves.push(c);
    for (name, t) in ["trace_pump_off.csv", "trace_pump_detuned.csv", "trace_pump_tuned.csv"].iter().zip(&traces) {
        let mut buf = Vec::new();
        t.write_csv(&mut buf).ctx(KIND_C, "trace csv")?;
        out.files.push((name.to_string(), String::from_utf8_lossy(&buf).into_owned()));
    }

    for (id, t) in ["table_rate_off", "table_rate_detuned", "table_rate_tuned"].iter().zip(&traces) {
        out.check(id, t.rate(), None, Some(t.total_wall_time));
    }
    for ((_, id), t) in HOT_ROWS.iter().zip(&traces[3..]) {
        out.check(id, t.rate(), None, Some(t.total_wall_time));
    }
    Ok(())
}
