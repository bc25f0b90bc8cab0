//! Reference values computed independently (double precision, closed forms
//! evaluated outside this crate) and frozen here.

use approx::assert_relative_eq;
use smpd_core::constants::{ghz, khz, mhz, to_hz};
use smpd_core::figures::{k_q_detected, kappa_b_for_bandwidth};
use smpd_core::tuning::fwm::numeric_fwhm;
use smpd_core::*;

#[test]
fn window_survival() {
    assert_relative_eq!(eta_q(15e-6, 70e-6).unwrap(), 0.900_117_180_641_516_6, max_relative = 1e-14);
    assert_relative_eq!(eta_4wm(0.99).unwrap(), 0.999_974_748_112_421_4, max_relative = 1e-14);
}

#[test]
fn bandwidth_table() {
    for (kb, expect) in [
        (120.0, 254_582.293_598_895_75),
        (170.0, 366_825.698_235_903_87),
        (280.0, 615_010.992_919_882_2),
    ] {
        let k = detection_bandwidth(khz(kb), mhz(1.75)).unwrap();
        assert_relative_eq!(to_hz(k), expect, max_relative = 1e-12);
        let n = numeric_fwhm(1.0, khz(kb), mhz(1.75)).unwrap();
        assert_relative_eq!(n, k, max_relative = 1e-9);
        assert_relative_eq!(kappa_b_for_bandwidth(k, mhz(1.75)).unwrap(), khz(kb), max_relative = 1e-9);
    }
}

#[test]
fn effective_temperatures() {
    let t_b = temperature_from_occupation(ghz(7.7), 1.5e-4).unwrap();
    assert_relative_eq!(t_b, 0.041_969_410_174_360_35, max_relative = 1e-9);
    let t_q = temperature_from_occupation(ghz(6.533), 8.5e-4).unwrap();
    assert_relative_eq!(t_q, 0.044_340_129_879_730_73, max_relative = 1e-9);
    assert_relative_eq!(bose_einstein(ghz(7.7), t_b).unwrap(), 1.5e-4, max_relative = 1e-12);
}

#[test]
fn sensitivity_and_thermal_rate() {
    assert_relative_eq!(sensitivity(0.8, 31.0, ghz(7.7)).unwrap(), 3.550_893_232_827_045e-23, max_relative = 1e-8);
    assert_relative_eq!(alpha_th_rate(1.5e-4, khz(170.0), 0.8).unwrap(), 32.044_245, max_relative = 1e-6);
    assert_relative_eq!(k_th(khz(170.0), 0.8).unwrap(), 213_628.3, max_relative = 1e-6);
}

#[test]
fn qubit_dark_count_coefficients() {
    let timing = CycleTiming::default();
    assert_relative_eq!(k_q(&timing, 70e-6).unwrap(), 13_562.386_980_108_497, max_relative = 1e-12);
    assert_relative_eq!(k_q_detected(&timing, 70e-6, 0.87).unwrap(), 10_620.731_652_234_892, max_relative = 1e-12);
}

#[test]
fn default_operating_point() {
    let d = DeviceParams::default();
    let fom = figure_of_merit(&d, &TuningState::default(), &CycleTiming::default(), &NoiseEnvironment::default()).unwrap();
    assert_relative_eq!(fom.eta_smpd, 0.743_451_2, max_relative = 1e-6);
    assert_relative_eq!(fom.alpha_q, 8.006, max_relative = 1e-3);
    assert_relative_eq!(fom.alpha_th, 21.15, max_relative = 2e-3);
    assert_eq!(fom.alpha_p, 2.0);
    assert_relative_eq!(fom.alpha_total, fom.alpha_q + fom.alpha_p + fom.alpha_th, max_relative = 1e-15);
}
