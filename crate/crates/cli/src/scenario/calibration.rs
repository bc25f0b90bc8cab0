use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smpd_core::constants::{hz, khz, to_hz};
use smpd_core::fit::{fit_4wm_map, fit_purcell_curve, fit_sinusoid, fit_squid_exact};
use smpd_core::search::linspace;
use smpd_core::sim::derive_seed;
use smpd_core::synth;
use smpd_core::tuning::fwm::FourWaveMixingSurface;
use smpd_core::tuning::purcell::{kappa_bc_of_detuning, PurcellCouplingModel};
use smpd_core::tuning::squid::{
    buffer_frequency, purcell_frequency, purcell_frequency_unclipped, ratio_from_asymmetry, SquidTuningModel,
    PURCELL_RANGE,
};

use super::{Context, ScenarioError, ScenarioKind};
use crate::config::Config;
use crate::report::{Curve, ScenarioOutput};

const KIND_T: ScenarioKind = ScenarioKind::TuningCurves;
const KIND_F: ScenarioKind = ScenarioKind::FwmMap;

/// Largest coupling through the Purcell filter, Hz.
const KAPPA_BC_MAX_HZ: f64 = 3e6;

fn rng(seed: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, i))
}

pub(super) fn tuning_curves(config: &Config, seed: u64, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let noise = config.scenario.tuning_noise;
    let d = &config.sim.device;
    let phis = linspace(-0.5, 0.5, 41);

    let exact = SquidTuningModel::reference_buffer();
    let data = synth::buffer_tuning_curve(&mut rng(seed, 0), &exact, &phis, noise);
    let (fitted, _) = fit_squid_exact(&data, exact.participation).ctx(KIND_T, "buffer SQUID fit")?;

    let sine = exact.as_sinusoidal();
    let sine_data = synth::buffer_tuning_curve(&mut rng(seed, 1), &sine, &phis, noise);
    let sf = fit_sinusoid(&sine_data).ctx(KIND_T, "sinusoid fit")?;

    let mut buf = Curve::new("buffer_tuning", &["phi", "exact_data_hz", "exact_fit_hz", "sine_data_hz", "sine_fit_hz"]);
    for (i, &p) in phis.iter().enumerate() {
        let sine_fit = sf.mean + sf.amplitude * (2.0 * std::f64::consts::PI * (p - sf.flux_offset)).cos();
        buf.push(vec![
            p,
            to_hz(data[i].1),
            to_hz(buffer_frequency(p, &fitted)),
            to_hz(sine_data[i].1),
            to_hz(sine_fit),
        ]);
    }
    out.curves.push(buf);

    // Purcell filter, fitted inside the measured range only
    let purcell = SquidTuningModel::exact(PURCELL_RANGE.1, 0.0);
    let pphis = linspace(-0.16, 0.16, 33);
    let pdata = synth::purcell_tuning_curve(&mut rng(seed, 2), purcell.omega_max, 0.0, &pphis, noise);
    let pfit = fit_purcell_curve(&pdata).ctx(KIND_T, "Purcell fit")?;
    let (wmax, woff) = (pfit.value("omega_max"), pfit.value("flux_offset"));
    let mut pc = Curve::new("purcell_tuning", &["phi", "data_hz", "fit_hz"]);
    for (&p, &(_, y)) in pphis.iter().zip(&pdata) {
        pc.push(vec![p, to_hz(y), to_hz(purcell_frequency_unclipped(p, wmax, woff))]);
    }
    out.curves.push(pc);

    let coupling = PurcellCouplingModel::from_max(hz(KAPPA_BC_MAX_HZ), d.kappa_pb, d.kappa_b_i)
        .ctx(KIND_T, "coupling model")?;
    let mut kc = Curve::new("kappa_bc", &["phi_pb", "purcell_hz", "detuning_hz", "kappa_bc_hz"]);
    let mut kmax: f64 = 0.0;
    for p in linspace(-0.45, 0.45, 181) {
        let wp = purcell_frequency(p, &purcell).ctx(KIND_T, "Purcell frequency")?;
        let k = kappa_bc_of_detuning(d.omega_b - wp, &coupling);
        kmax = kmax.max(k);
        kc.push(vec![p, to_hz(wp), to_hz(d.omega_b - wp), to_hz(k)]);
    }
    out.curves.push(kc);
    let det10 = coupling.detuning_for(khz(10.0)).ctx(KIND_T, "coupling inversion")?;

    out.check("buffer_junction_ratio", ratio_from_asymmetry(fitted.asymmetry), None, None);
    out.check("buffer_sinusoid_amplitude", to_hz(sf.amplitude), Some(to_hz(sine.sinusoid_coefficients().1)), None);
    out.check("purcell_max_frequency", to_hz(wmax), None, None);
    out.check("kappa_bc_max", to_hz(kmax), None, None);
    out.check("kappa_bc_10khz_detuning", to_hz(det10), None, None);
    Ok(())
}

pub(super) fn fwm_map(config: &Config, seed: u64, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let s = FourWaveMixingSurface::from_device(&config.sim.device, config.sim.tuning.cooperativity);
    let wp: Vec<f64> = (0..25).map(|i| s.omega_4wm + (i as f64 - 12.0) * 0.25 * s.kappa_w).collect();
    let w: Vec<f64> = (0..25).map(|j| s.omega_b + (j as f64 - 12.0) * 0.25 * s.kappa_b).collect();
    let map = synth::fwm_map(&mut rng(seed, 0), &s, wp, w, 0.9, 0.05, config.scenario.fwm_noise);
    let f = fit_4wm_map(&map).ctx(KIND_F, "map fit")?;

    let mut c = Curve::new("fwm_map", &["pump_hz", "signal_hz", "value", "fit"]);
    for (i, &p) in map.omega_p.iter().enumerate() {
        for (j, &x) in map.omega.iter().enumerate() {
            c.push(vec![to_hz(p), to_hz(x), map.at(i, j), f.amplitude * f.surface.response(p, x) + f.background]);
        }
    }
    out.curves.push(c);
    let json = serde_json::to_string_pretty(&f).ctx(KIND_F, "serialize")?;
    out.files.push(("fit.json".into(), json + "\n"));

    let got = f.surface;
    out.check("fwm_cooperativity", got.cooperativity, Some(s.cooperativity), None);
    out.check("fwm_kappa_b", to_hz(got.kappa_b), Some(to_hz(s.kappa_b)), None);
    out.check("fwm_kappa_w", to_hz(got.kappa_w), Some(to_hz(s.kappa_w)), None);
    out.check("fwm_cooperativity_reported", got.cooperativity, None, None);
    Ok(())
}
