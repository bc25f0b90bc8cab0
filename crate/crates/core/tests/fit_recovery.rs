//! Every fitter, 200 seeded synthetic data sets each: the fitted value lies
//! within 3σ of the truth in at least 95% of trials for every parameter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smpd_core::constants::{ghz, khz, mhz};
use smpd_core::fit::*;
use smpd_core::sim::derive_seed;
use smpd_core::synth;
use smpd_core::tuning::fwm::FourWaveMixingSurface;
use smpd_core::tuning::squid::SquidTuningModel;
use smpd_core::DeviceParams;

const TRIALS: usize = 200;

fn coverage<F>(label: &str, truths: &[(&str, f64)], mut trial: F)
where
    F: FnMut(&mut ChaCha8Rng) -> FitResult,
{
    let mut hits = vec![0usize; truths.len()];
    for i in 0..TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xF17, i as u64));
        let fit = trial(&mut rng);
        for (k, (name, truth)) in truths.iter().enumerate() {
            if fit.pull(name, *truth) <= 3.0 {
                hits[k] += 1;
            }
        }
    }
    for (k, (name, _)) in truths.iter().enumerate() {
        let frac = hits[k] as f64 / TRIALS as f64;
        assert!(frac >= 0.95, "{label}: {name} within 3σ in only {:.1}% of trials", 100.0 * frac);
    }
}

#[test]
fn lorentzian_line() {
    let xs: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
    let truth = [("center", 0.12), ("fwhm", 0.8), ("amplitude", 1.0), ("baseline", 0.05)];
    coverage("lorentzian", &truth, |rng| {
        let s = synth::lorentzian_samples(rng, &xs, 0.12, 0.8, 1.0, 0.05, 0.02);
        fit_lorentzian(&s).unwrap().fit
    });
}

#[test]
fn sinusoidal_tuning_curve() {
    let m = SquidTuningModel {
        flux_offset: 0.07,
        ..SquidTuningModel::reference_buffer()
    }
    .as_sinusoidal();
    let (mean, amp) = m.sinusoid_coefficients();
    let phis: Vec<f64> = (0..41).map(|i| -0.5 + 0.025 * i as f64).collect();
    let truth = [("mean", mean), ("amplitude", amp), ("flux_offset", 0.07)];
    coverage("sinusoid", &truth, |rng| {
        let pts = synth::buffer_tuning_curve(rng, &m, &phis, mhz(0.5));
        fit_sinusoid(&pts).unwrap().fit
    });
}

#[test]
fn exact_squid_curve() {
    let m = SquidTuningModel {
        flux_offset: -0.04,
        ..SquidTuningModel::reference_buffer()
    };
    let phis: Vec<f64> = (0..41).map(|i| -0.5 + 0.025 * i as f64).collect();
    let truth = [("omega_max", m.omega_max), ("asymmetry", m.asymmetry), ("flux_offset", -0.04)];
    coverage("squid", &truth, |rng| {
        let pts = synth::buffer_tuning_curve(rng, &m, &phis, mhz(0.3));
        fit_squid_exact(&pts, m.participation).unwrap().1
    });
}

#[test]
fn purcell_curve() {
    let phis: Vec<f64> = (0..29).map(|i| -0.35 + 0.025 * i as f64).collect();
    let truth = [("omega_max", ghz(7.9)), ("flux_offset", 0.03)];
    coverage("purcell", &truth, |rng| {
        let pts = synth::purcell_tuning_curve(rng, ghz(7.9), 0.03, &phis, mhz(1.0));
        fit_purcell_curve(&pts).unwrap()
    });
}

#[test]
fn conversion_map() {
    let s = FourWaveMixingSurface::from_device(&DeviceParams::default(), 0.8);
    let wp: Vec<f64> = (0..25).map(|i| s.omega_4wm + (i as f64 - 12.0) * 0.25 * s.kappa_w).collect();
    let w: Vec<f64> = (0..25).map(|j| s.omega_b + (j as f64 - 12.0) * 0.25 * s.kappa_b).collect();
    let truth = [
        ("C", 0.8),
        ("kappa_b", s.kappa_b),
        ("kappa_w", s.kappa_w),
        ("omega_4wm", s.omega_4wm),
        ("omega_b", s.omega_b),
    ];
    coverage("4wm map", &truth, |rng| {
        let map = synth::fwm_map(rng, &s, wp.clone(), w.clone(), 0.9, 0.05, 0.02);
        fit_4wm_map(&map).unwrap().fit
    });
}

#[test]
fn thermal_line() {
    let omega = ghz(7.7);
    let temps = [0.010, 0.030, 0.050, 0.060, 0.090];
    let n = |t: f64| smpd_core::bose_einstein(omega, t).unwrap();
    let truth = [("rate_0", 10.0), ("K", 2e5)];
    coverage("thermal", &truth, |rng| {
        let pts = synth::rate_points(rng, &temps, 30.0, |t| 10.0 + 2e5 * n(t));
        fit_thermal_model(&pts, ThermalBranch::Thermal, omega).unwrap().fit
    });
}

#[test]
fn straight_line() {
    let x: Vec<f64> = (0..6).map(|i| khz(100.0) + i as f64 * khz(180.0)).collect();
    let truth = [("intercept", 10.0), ("slope", 1.6e-5)];
    coverage("linear", &truth, |rng| {
        let pts = synth::rate_points(rng, &x, 100.0, |k| 10.0 + 1.6e-5 * k);
        let y: Vec<f64> = pts.iter().map(|p| p.rate).collect();
        let s: Vec<f64> = pts.iter().map(|p| p.sigma.unwrap()).collect();
        fit_linear(&x, &y, Some(&s)).unwrap()
    });
}

#[test]
fn fluorescence_decay() {
    let gamma = 1.0 / 1.24e-3;
    let truth = [("rate", gamma), ("amplitude", 200.0), ("background", 5.0)];
    coverage("exponential", &truth, |rng| {
        let bins = synth::decay_histogram(rng, 40, 0.25e-3, gamma, 200.0, 5.0);
        fit_exponential_decay(&bins).unwrap().fit
    });
}
