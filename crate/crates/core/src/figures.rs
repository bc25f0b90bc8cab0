//! Closed-form figures of merit: efficiency, dark and thermal count rates,
//! sensitivity and detection bandwidth.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{non_negative, positive, Error, Result};
use crate::params::{CycleTiming, DeviceParams, NoiseEnvironment, TuningState};
use crate::tuning::fwm::s_4wm;

/// Frequency-conversion efficiency 4C/(1+C)².
pub fn eta_4wm(c: f64) -> Result<f64> {
    non_negative("C", c)?;
    Ok(4.0 * c / ((1.0 + c) * (1.0 + c)))
}

/// [`eta_4wm`] degraded by buffer internal losses, ×κ_b,c/κ_b.
pub fn eta_4wm_with_losses(c: f64, kappa_b_c: f64, kappa_b_i: f64) -> Result<f64> {
    positive("kappa_b_c", kappa_b_c)?;
    non_negative("kappa_b_i", kappa_b_i)?;
    Ok(eta_4wm(c)? * kappa_b_c / (kappa_b_c + kappa_b_i))
}

/// Probability that an excitation created uniformly in the window survives T1 decay.
pub fn eta_q(t_d: f64, t1: f64) -> Result<f64> {
    positive("t_d", t_d)?;
    positive("t1", t1)?;
    let x = t_d / t1;
    // -expm1 keeps precision for x → 0
    Ok(-(-x).exp_m1() / x)
}

pub fn eta_omega(omega: f64, omega_b: f64, kappa_d: f64) -> Result<f64> {
    positive("kappa_d", kappa_d)?;
    let u = 2.0 * (omega - omega_b) / kappa_d;
    Ok(1.0 / (1.0 + u * u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyBreakdown {
    pub eta_omega: f64,
    pub eta_4wm: f64,
    pub eta_q: f64,
    pub f_ro: f64,
    pub eta_cycle: f64,
    pub total: f64,
}

/// Bandwidth in effect for `tuning`: the stored measurement or the closed form.
pub fn effective_kappa_d(device: &DeviceParams, tuning: &TuningState) -> f64 {
    tuning
        .kappa_d
        .unwrap_or_else(|| detection_bandwidth(device.kappa_b(), device.kappa_w).unwrap_or(0.0))
}

/// Conversion efficiency at the buffer centre with the pump detuned by δ_p.
pub fn conversion_efficiency(device: &DeviceParams, tuning: &TuningState) -> Result<f64> {
    if !tuning.pump_on() {
        return Ok(0.0);
    }
    s_4wm(
        0.0,
        tuning.delta_p,
        tuning.cooperativity,
        device.kappa_b(),
        device.kappa_w,
    )
}

/// Detector efficiency η_ω · η_4WM · η_q · F_RO · η_cycle at frequency `omega`.
pub fn eta_smpd(
    device: &DeviceParams,
    tuning: &TuningState,
    timing: &CycleTiming,
    omega: f64,
) -> Result<EfficiencyBreakdown> {
    eta_smpd_impl(device, tuning, timing, omega, false)
}

/// As [`eta_smpd`] with the internal-loss penalty κ_b,c/κ_b applied to η_4WM.
pub fn eta_smpd_lossy(
    device: &DeviceParams,
    tuning: &TuningState,
    timing: &CycleTiming,
    omega: f64,
) -> Result<EfficiencyBreakdown> {
    eta_smpd_impl(device, tuning, timing, omega, true)
}

fn eta_smpd_impl(
    device: &DeviceParams,
    tuning: &TuningState,
    timing: &CycleTiming,
    omega: f64,
    lossy: bool,
) -> Result<EfficiencyBreakdown> {
    timing.validate()?;
    let kappa_d = effective_kappa_d(device, tuning);
    let eta_w = eta_omega(omega, device.omega_b, kappa_d)?;
    let mut e4 = conversion_efficiency(device, tuning)?;
    if lossy {
        e4 *= device.kappa_b_c / device.kappa_b();
    }
    let eq = eta_q(timing.t_d, device.t1)?;
    let cyc = timing.duty_cycle();
    Ok(EfficiencyBreakdown {
        eta_omega: eta_w,
        eta_4wm: e4,
        eta_q: eq,
        f_ro: device.f_ro,
        eta_cycle: cyc,
        total: eta_w * e4 * eq * device.f_ro * cyc,
    })
}

/// K_q = (T_d/T1) / cycle duration.
pub fn k_q(timing: &CycleTiming, t1: f64) -> Result<f64> {
    positive("t1", t1)?;
    let cycle = positive("cycle duration", timing.cycle_duration())?;
    Ok(timing.t_d / t1 / cycle)
}

/// Dark-count rate from qubit thermal excitation, linear in T_d/T1.
pub fn alpha_q_rate(p_th_q: f64, timing: &CycleTiming, t1: f64) -> Result<f64> {
    non_negative("p_th_q", p_th_q)?;
    Ok(p_th_q * k_q(timing, t1)?)
}

/// Coefficient of [`alpha_q_detected`]: (1 − e^(−T_d/T1))·F_RO / cycle duration.
pub fn k_q_detected(timing: &CycleTiming, t1: f64, f_ro: f64) -> Result<f64> {
    positive("t1", t1)?;
    let cycle = positive("cycle duration", timing.cycle_duration())?;
    Ok(-(-timing.t_d / t1).exp_m1() * f_ro / cycle)
}

/// Qubit-thermal click rate including relaxation during the window and readout fidelity.
///
/// Upward jumps at rate p/T1 that survive to readout give p(1 − e^(−T_d/T1))
/// excitations per cycle; the linear form p·T_d/T1 is its small-window limit.
pub fn alpha_q_detected(p_th_q: f64, timing: &CycleTiming, t1: f64, f_ro: f64) -> Result<f64> {
    non_negative("p_th_q", p_th_q)?;
    Ok(p_th_q * k_q_detected(timing, t1, f_ro)?)
}

/// Mean photon number per mode at angular frequency `omega`.
pub fn bose_einstein(omega: f64, temperature: f64) -> Result<f64> {
    positive("temperature", temperature)?;
    positive("omega", omega)?;
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}

/// Inverse of [`bose_einstein`].
pub fn temperature_from_occupation(omega: f64, n: f64) -> Result<f64> {
    positive("occupation", n)?;
    positive("omega", omega)?;
    Ok(HBAR * omega / (K_B * (1.0 / n).ln_1p()))
}

/// Thermal click rate n̄·κ_d·η/4 (flux density integrated over dω/2π).
pub fn alpha_th_rate(n_th_b: f64, kappa_d: f64, eta_at_resonance: f64) -> Result<f64> {
    non_negative("n_th_b", n_th_b)?;
    Ok(n_th_b * k_th(kappa_d, eta_at_resonance)?)
}

/// K_th = η κ_d / 4.
pub fn k_th(kappa_d: f64, eta_at_resonance: f64) -> Result<f64> {
    non_negative("kappa_d", kappa_d)?;
    non_negative("eta", eta_at_resonance)?;
    Ok(eta_at_resonance * kappa_d / 4.0)
}

/// Power sensitivity ħω_b √α / η, W/√Hz.
pub fn sensitivity(eta: f64, alpha_total: f64, omega_b: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain("eta", eta, "sensitivity needs eta in (0, 1]"));
    }
    non_negative("alpha_total", alpha_total)?;
    Ok(HBAR * omega_b * alpha_total.sqrt() / eta)
}

/// FWHM of the conversion response at C = 1.
pub fn detection_bandwidth(kappa_b: f64, kappa_w: f64) -> Result<f64> {
    positive("kappa_b", kappa_b)?;
    positive("kappa_w", kappa_w)?;
    let h = (kappa_b - kappa_w) / 2.0;
    let h2 = h * h;
    let root = (kappa_b * kappa_b * kappa_w * kappa_w + h2 * h2).sqrt();
    // root − h² loses digits when κ_b ≪ κ_w; use the conjugate form
    let diff = kappa_b * kappa_b * kappa_w * kappa_w / (root + h2);
    Ok(std::f64::consts::SQRT_2 * diff.sqrt())
}

/// κ_b giving bandwidth `kappa_d` at fixed κ_w, by bisection.
pub fn kappa_b_for_bandwidth(kappa_d: f64, kappa_w: f64) -> Result<f64> {
    positive("kappa_d", kappa_d)?;
    positive("kappa_w", kappa_w)?;
    let f = |kb: f64| detection_bandwidth(kb, kappa_w).map(|k| k - kappa_d);
    let lo = kappa_d * 1e-9;
    let mut hi = kappa_d;
    while f(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e6 * kappa_d {
            return Err(Error::domain("kappa_d", kappa_d, "unreachable bandwidth"));
        }
    }
    crate::search::bisect(|x| f(x).unwrap_or(f64::NAN), lo, hi, 1e-13)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureOfMerit {
    pub efficiency: EfficiencyBreakdown,
    pub eta_smpd: f64,
    pub n_th_b: f64,
    pub p_th_q: f64,
    pub alpha_q: f64,
    pub alpha_p: f64,
    pub alpha_th: f64,
    /// α_q + α_p.
    pub alpha_err: f64,
    pub alpha_total: f64,
    pub sensitivity: f64,
    pub kappa_d: f64,
}

/// All figures of merit at the buffer frequency.
///
/// α_q uses [`alpha_q_detected`], the same model the cycle simulator
/// integrates, so Monte Carlo rates can be compared to it directly.
pub fn figure_of_merit(
    device: &DeviceParams,
    tuning: &TuningState,
    timing: &CycleTiming,
    noise: &NoiseEnvironment,
) -> Result<FigureOfMerit> {
    let eff = eta_smpd(device, tuning, timing, device.omega_b)?;
    let kappa_d = effective_kappa_d(device, tuning);
    let n = noise.n_th_b(device.omega_b);
    let p = noise.p_th_q(device.omega_q);
    let alpha_q = alpha_q_detected(p, timing, device.t1, device.f_ro)?;
    let alpha_p = if tuning.pump_on() { noise.alpha_p } else { 0.0 };
    let alpha_th = alpha_th_rate(n, kappa_d, eff.total)?;
    let alpha_total = alpha_q + alpha_p + alpha_th;
    let s = if eff.total > 0.0 {
        sensitivity(eff.total, alpha_total, device.omega_b)?
    } else {
        f64::INFINITY
    };
    Ok(FigureOfMerit {
        efficiency: eff,
        eta_smpd: eff.total,
        n_th_b: n,
        p_th_q: p,
        alpha_q,
        alpha_p,
        alpha_th,
        alpha_err: alpha_q + alpha_p,
        alpha_total,
        sensitivity: s,
        kappa_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ghz, khz, mhz, TWO_PI};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eta_4wm_values() {
        assert_eq!(eta_4wm(1.0).unwrap(), 1.0);
        assert_eq!(eta_4wm(0.0).unwrap(), 0.0);
        assert_relative_eq!(eta_4wm(0.99).unwrap(), 0.999_974_748_112_421_4, epsilon = 1e-15);
        assert!(eta_4wm(-0.1).is_err());
    }

    #[test]
    fn eta_4wm_scan_max_only_at_one() {
        for i in 0..=10_000 {
            let c = i as f64 * 1e-3;
            let e = eta_4wm(c).unwrap();
            assert!(e <= 1.0);
            if (c - 1.0).abs() > 1e-9 {
                assert!(e < 1.0, "C = {c}");
            }
        }
    }

    #[test]
    fn internal_losses_reduce_conversion() {
        let d = DeviceParams::default();
        let e = eta_4wm_with_losses(1.0, d.kappa_b_c, d.kappa_b_i).unwrap();
        assert_relative_eq!(e, d.kappa_b_c / d.kappa_b(), epsilon = 1e-15);
        assert_eq!(eta_4wm_with_losses(1.0, 1.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn eta_q_values() {
        assert_relative_eq!(eta_q(15e-6, 70e-6).unwrap(), 0.900_117_180_641_516_6, epsilon = 1e-14);
        assert_relative_eq!(eta_q(1.0, 1.0).unwrap(), 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(eta_q(1e-15, 70e-6).unwrap(), 1.0, epsilon = 1e-10);
        assert!(eta_q(0.0, 1.0).is_err());
        assert!(eta_q(1.0, -1.0).is_err());
    }

    #[test]
    fn eta_q_vs_linear_approximation() {
        for i in 1..=300 {
            let x = i as f64 * 0.01;
            let exact = eta_q(x, 1.0).unwrap();
            let lin = 1.0 - x / 2.0;
            assert!(exact >= lin);
            // the gap grows as x²/6: under one percentage point only up to x ≈ 0.245
            if x <= 0.24 {
                assert!(exact - lin < 0.01, "x = {x}");
            }
        }
    }

    #[test]
    fn eta_omega_values() {
        let kd = khz(170.0);
        let wb = ghz(7.7);
        assert_eq!(eta_omega(wb, wb, kd).unwrap(), 1.0);
        assert_relative_eq!(eta_omega(wb + kd / 2.0, wb, kd).unwrap(), 0.5, max_relative = 1e-9);
        assert_relative_eq!(eta_omega(wb - kd, wb, kd).unwrap(), 0.2, max_relative = 1e-9);
        assert_eq!(eta_omega(0.5, 0.0, 1.0).unwrap(), 0.5);
        assert!(eta_omega(wb, wb, 0.0).is_err());
    }

    #[test]
    fn eta_smpd_default_prediction() {
        let d = DeviceParams::default();
        let t = TuningState::default();
        let c = CycleTiming::default();
        let e = eta_smpd(&d, &t, &c, d.omega_b).unwrap();
        assert_relative_eq!(e.total, 0.743_451_2, epsilon = 1e-6);
        assert!((e.total - 0.74).abs() < 0.01);
        let kd = effective_kappa_d(&d, &t);
        let half = eta_smpd(&d, &t, &c, d.omega_b + kd / 2.0).unwrap();
        assert_relative_eq!(half.total, e.total / 2.0, max_relative = 1e-9);
        let mut d0 = d;
        d0.f_ro = 1e-300;
        assert!(eta_smpd(&d0, &t, &c, d.omega_b).unwrap().total < 1e-290);
    }

    #[test]
    fn lossy_efficiency_is_lower() {
        let d = DeviceParams::default();
        let t = TuningState::default();
        let c = CycleTiming::default();
        let a = eta_smpd(&d, &t, &c, d.omega_b).unwrap().total;
        let b = eta_smpd_lossy(&d, &t, &c, d.omega_b).unwrap().total;
        assert_relative_eq!(b / a, d.kappa_b_c / d.kappa_b(), epsilon = 1e-12);
    }

    #[test]
    fn pump_off_has_no_conversion() {
        let d = DeviceParams::default();
        let e = eta_smpd(&d, &TuningState::pump_off(), &CycleTiming::default(), d.omega_b).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn k_q_matches_reference_scale() {
        let c = CycleTiming::default();
        assert_relative_eq!(k_q(&c, 70e-6).unwrap(), 13_562.387, max_relative = 1e-6);
        assert_relative_eq!(alpha_q_rate(8.5e-4, &c, 70e-6).unwrap(), 11.528, max_relative = 1e-3);
        assert_eq!(alpha_q_rate(0.0, &c, 70e-6).unwrap(), 0.0);
        let zero = CycleTiming {
            t_d: 1e-6,
            t_ro: 0.0,
            t_reset_unit: 0.0,
            mean_resets_per_cycle: 0.0,
        };
        assert!(k_q(&zero, 70e-6).is_ok());
    }

    #[test]
    fn detected_alpha_q_is_smaller_than_linear() {
        let c = CycleTiming::default();
        let lin = k_q(&c, 70e-6).unwrap();
        let det = k_q_detected(&c, 70e-6, 1.0).unwrap();
        assert!(det < lin);
        assert_relative_eq!(det * 0.87, 10_620.73, max_relative = 1e-5);
    }

    #[test]
    fn bose_einstein_values() {
        let t = temperature_from_occupation(ghz(7.7), 1.5e-4).unwrap();
        assert_relative_eq!(t, 41.969e-3, max_relative = 1e-4);
        assert!((t - 40e-3).abs() < 3e-3);
        let t = temperature_from_occupation(ghz(6.533), 8.5e-4).unwrap();
        assert_relative_eq!(t, 44.340e-3, max_relative = 1e-4);
        assert!((t - 42e-3).abs() < 3e-3);
        assert!(bose_einstein(ghz(7.7), 0.0).is_err());
        assert!(bose_einstein(ghz(7.7), -1.0).is_err());
    }

    #[test]
    fn rayleigh_jeans_limit() {
        let w = ghz(1.0);
        let t = HBAR * w / K_B / 1e-3;
        let n = bose_einstein(w, t).unwrap();
        assert!((n / (K_B * t / (HBAR * w)) - 1.0).abs() < 0.01);
    }

    #[test]
    fn bose_einstein_inverse_over_range() {
        let w = ghz(7.7);
        for i in 0..=195 {
            let t = (5.0 + i as f64) * 1e-3;
            let back = temperature_from_occupation(w, bose_einstein(w, t).unwrap()).unwrap();
            assert!((back - t).abs() / t < 1e-12, "T = {t}");
        }
    }

    #[test]
    fn thermal_rate_values() {
        assert_relative_eq!(alpha_th_rate(1.5e-4, khz(170.0), 0.8).unwrap(), 32.044, max_relative = 1e-4);
        assert_relative_eq!(k_th(khz(170.0), 0.8).unwrap(), 213_628.3, max_relative = 1e-6);
        assert_eq!(alpha_th_rate(0.0, khz(170.0), 0.8).unwrap(), 0.0);
    }

    #[test]
    fn thermal_rate_matches_numeric_integral() {
        // ∫ n̄ η_ω(ω) dω/2π by trapezoid over ±2000 κ_d plus analytic tails
        let kd = khz(170.0);
        let wb = ghz(7.7);
        let span = 2000.0 * kd;
        let n = 400_000;
        let h = 2.0 * span / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let w = wb - span + i as f64 * h;
            let f = eta_omega(w, wb, kd).unwrap();
            sum += if i == 0 || i == n { 0.5 * f } else { f };
        }
        let tails = 2.0 * (kd / 2.0) * (kd / 2.0) / span;
        let integral = (sum * h + tails) / TWO_PI;
        let closed = alpha_th_rate(1.0, kd, 1.0).unwrap();
        assert!((integral / closed - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sensitivity_values() {
        let s = sensitivity(0.8, 31.0, ghz(7.7)).unwrap();
        assert_relative_eq!(s, 3.550_89e-23, max_relative = 1e-5);
        assert_eq!(sensitivity(0.8, 0.0, ghz(7.7)).unwrap(), 0.0);
        let s2 = sensitivity(0.8, 62.0, ghz(7.7)).unwrap();
        assert_relative_eq!(s2 / s, 2f64.sqrt(), epsilon = 1e-12);
        assert!(sensitivity(0.0, 31.0, ghz(7.7)).is_err());
    }

    #[test]
    fn bandwidth_values() {
        let kd = detection_bandwidth(khz(120.0), mhz(1.75)).unwrap();
        assert_relative_eq!(kd / TWO_PI, 254_582.293_598_895_75, max_relative = 1e-10);
        assert!((kd / khz(240.0) - 1.0).abs() < 0.1);
        let kd = detection_bandwidth(khz(170.0), mhz(1.75)).unwrap();
        assert_relative_eq!(kd / TWO_PI, 366_825.698_235_903_87, max_relative = 1e-10);
        let k = khz(500.0);
        assert_relative_eq!(detection_bandwidth(k, k).unwrap(), 2f64.sqrt() * k, epsilon = 1e-6);
        assert!(detection_bandwidth(0.0, k).is_err());
    }

    #[test]
    fn bandwidth_inverse() {
        let kw = mhz(1.75);
        for kb_khz in [10.0, 120.0, 170.0, 280.0, 900.0] {
            let kb = khz(kb_khz);
            let kd = detection_bandwidth(kb, kw).unwrap();
            assert_relative_eq!(kappa_b_for_bandwidth(kd, kw).unwrap(), kb, max_relative = 1e-9);
        }
    }

    #[test]
    fn figure_of_merit_defaults() {
        let fom = figure_of_merit(
            &DeviceParams::default(),
            &TuningState::default(),
            &CycleTiming::default(),
            &NoiseEnvironment::default(),
        )
        .unwrap();
        assert_relative_eq!(fom.alpha_total, fom.alpha_q + fom.alpha_p + fom.alpha_th, epsilon = 1e-12);
        assert!((fom.alpha_q - 8.0).abs() < 0.1);
        assert!((fom.alpha_th - 21.15).abs() < 0.1);
        assert!(fom.sensitivity > 0.0);
    }

    proptest! {
        #[test]
        fn bandwidth_symmetric_and_monotone(a in 1e3f64..1e8, b in 1e3f64..1e8, s in 1.001f64..3.0) {
            let k = detection_bandwidth(a, b).unwrap();
            prop_assert!((k - detection_bandwidth(b, a).unwrap()).abs() <= 1e-12 * k);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(detection_bandwidth(lo * s, hi).unwrap() >= k * (1.0 - 1e-14));
            let scaled = detection_bandwidth(a * s, b * s).unwrap();
            prop_assert!((scaled / (s * k) - 1.0).abs() < 1e-12);
            // overshoots 2κ_min slightly near κ_b ≈ κ_w, then falls back to it
            prop_assert!(k <= 2.2 * lo);
        }

        #[test]
        fn sensitivity_identity(eta in 1e-3f64..1.0, alpha in 1e-3f64..1e5) {
            let wb = ghz(7.7);
            let s = sensitivity(eta, alpha, wb).unwrap();
            prop_assert!((s * eta / alpha.sqrt() / (HBAR * wb) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn eta_4wm_bounded(c in 0.0f64..1e6) {
            let e = eta_4wm(c).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            // C ↔ 1/C symmetry
            if c > 1e-6 {
                prop_assert!((e - eta_4wm(1.0 / c).unwrap()).abs() < 1e-12);
            }
        }
    }
}
