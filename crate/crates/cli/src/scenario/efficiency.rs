use rayon::prelude::*;
use smpd_core::constants::to_hz;
use smpd_core::fit::{fit_exponential_decay, fit_lorentzian, lorentzian};
use smpd_core::search::linspace;
use smpd_core::sim::{derive_seed, measure_efficiency, run_fluorescence};
use smpd_core::{detection_bandwidth, eta_smpd, SignalSource, SimulationConfig, TuningState};

use super::{Context, ScenarioError, ScenarioKind};
use crate::config::Config;
use crate::report::{Curve, ScenarioOutput};

const KIND_E: ScenarioKind = ScenarioKind::EfficiencySweep;
const KIND_F: ScenarioKind = ScenarioKind::Fluorescence;

/// Device with buffer linewidth `kappa_b` and measured bandwidth `kappa_d`,
/// its readout fidelity calibrated to the measured on-resonance efficiency.
fn sweep_config(config: &Config, kappa_b: f64, kappa_d: f64) -> smpd_core::Result<SimulationConfig> {
    let sim = &config.sim;
    let mut device = sim.device;
    device.kappa_b_c = kappa_b - device.kappa_b_i;
    let tuning = TuningState {
        xi0: device.xi0_for(sim.tuning.cooperativity),
        kappa_d: Some(kappa_d),
        ..sim.tuning
    };
    let c = SimulationConfig { device, tuning, ..*sim };
    c.validate()?;
    c.calibrated_to_efficiency(config.scenario.eta_measured)
}

pub(super) fn efficiency_sweep(config: &Config, seed: u64, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let p = &config.scenario;
    for (idx, name) in ["narrow", "wide"].into_iter().enumerate() {
        let (kb, kd) = (p.sweep_kappa_b[idx], p.sweep_kappa_d[idx]);
        let cfg = sweep_config(config, kb, kd)
            .ctx(KIND_E, &format!("{name} buffer"))?
            .with_duration(p.sweep_duration);
        let wb = cfg.device.omega_b;
        let omegas = linspace(wb - 2.0 * kd, wb + 2.0 * kd, p.sweep_points);
        let sub = derive_seed(seed, idx as u64);
        let points = omegas
            .par_iter()
            .enumerate()
            .map(|(i, &w)| {
                let c = cfg
                    .with_signal(SignalSource::Coherent { flux: p.sweep_flux, omega: w })
                    .with_seed(derive_seed(sub, i as u64));
                measure_efficiency(&c, p.sweep_flux)
            })
            .collect::<Result<Vec<_>, _>>()
            .ctx(KIND_E, "efficiency runs")?;

        let samples: Vec<(f64, f64)> = omegas.iter().zip(&points).map(|(&w, m)| (to_hz(w - wb), m.efficiency)).collect();
        let fit = fit_lorentzian(&samples).ctx(KIND_E, "Lorentzian fit")?;
        let mut c = Curve::new(
            &format!("sweep_{name}"),
            &["frequency_hz", "detuning_hz", "efficiency", "sigma", "fit", "analytic"],
        );
        for ((&w, m), &(x, _)) in omegas.iter().zip(&points).zip(&samples) {
            let a = eta_smpd(&cfg.device, &cfg.tuning, &cfg.timing, w).ctx(KIND_E, "analytic efficiency")?.total;
            c.push(vec![
                to_hz(w),
                x,
                m.efficiency,
                m.sigma,
                lorentzian(x, fit.center, fit.fwhm, fit.amplitude, fit.baseline),
                a,
            ]);
        }
        out.curves.push(c);

        let closed = detection_bandwidth(kb, cfg.device.kappa_w).ctx(KIND_E, "closed-form bandwidth")?;
        out.check(&format!("sweep_peak_{name}"), fit.amplitude + fit.baseline, None, None);
        out.check(&format!("sweep_kappa_d_{name}"), fit.fwhm.abs(), Some(to_hz(kd)), None);
        out.check(&format!("sweep_closed_form_{name}"), to_hz(closed), None, None);
    }
    Ok(())
}

pub(super) fn fluorescence(config: &Config, seed: u64, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let p = &config.scenario;
    let mut sim = config.sim;
    sim.tuning.kappa_d = Some(p.fluorescence_kappa_d);
    let cfg = sim
        .calibrated_to_efficiency(p.eta_measured)
        .ctx(KIND_F, "efficiency calibration")?
        .with_signal(SignalSource::Spin(p.spin))
        .with_seed(seed);
    let h = run_fluorescence(&cfg, p.fluorescence_repetitions, p.fluorescence_bin_width).ctx(KIND_F, "spin runs")?;
    let fit = fit_exponential_decay(&h.bins).ctx(KIND_F, "decay fit")?;

    let mut c = Curve::new("histogram", &["time_s", "counts", "fit"]);
    for &(t, n) in &h.bins {
        c.push(vec![t, n, fit.amplitude * (-fit.rate * t).exp() + fit.background]);
    }
    out.curves.push(c);
    let json = serde_json::to_string_pretty(&fit).ctx(KIND_F, "serialize")?;
    out.files.push(("fit.json".into(), json + "\n"));

    out.check("fluorescence_lifetime", 1.0 / fit.rate, None, None);
    out.check("fluorescence_efficiency", fit.efficiency(h.bin_width, h.repetitions), None, None);
    Ok(())
}
