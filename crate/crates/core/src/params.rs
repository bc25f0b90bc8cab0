//! Device, tuning, timing and noise parameter sets.
//!
//! Defaults reproduce the operating point of the characterised device
//! (buffer at 7.7 GHz, T1 = 70 µs, 15 µs detection windows at 10 mK).

use serde::{Deserialize, Serialize};

use crate::constants::{ghz, khz, mhz};
use crate::error::{non_negative, positive, Error, Result};
use crate::figures::bose_einstein;

/// Static device constants. Frequencies and rates in rad/s, times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub omega_b: f64,
    pub omega_w: f64,
    pub omega_q: f64,
    pub omega_pb: f64,
    pub omega_pw: f64,
    pub kappa_b_c: f64,
    pub kappa_b_i: f64,
    pub kappa_w: f64,
    pub kappa_pb: f64,
    pub kappa_pw: f64,
    pub chi_b: f64,
    pub chi_w: f64,
    pub t1: f64,
    pub t2_star: f64,
    pub f_ro: f64,
    pub p_th_q: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            omega_b: ghz(7.7),
            omega_w: ghz(8.475),
            omega_q: ghz(6.533),
            omega_pb: ghz(7.64),
            omega_pw: ghz(8.39),
            kappa_b_c: khz(85.0),
            kappa_b_i: 2.2e5,
            kappa_w: mhz(1.75),
            kappa_pb: mhz(20.0),
            kappa_pw: mhz(400.0),
            chi_b: mhz(3.5),
            chi_w: mhz(16.0),
            t1: 70e-6,
            t2_star: 20e-6,
            f_ro: 0.87,
            p_th_q: 8.5e-4,
        }
    }
}

impl DeviceParams {
    /// Total buffer linewidth κ_b = κ_b,c + κ_b,i.
    pub fn kappa_b(&self) -> f64 {
        self.kappa_b_c + self.kappa_b_i
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_b", self.omega_b),
            ("omega_w", self.omega_w),
            ("omega_q", self.omega_q),
            ("omega_pb", self.omega_pb),
            ("omega_pw", self.omega_pw),
            ("kappa_b_c", self.kappa_b_c),
            ("kappa_b_i", self.kappa_b_i),
            ("kappa_w", self.kappa_w),
            ("kappa_pb", self.kappa_pb),
            ("kappa_pw", self.kappa_pw),
            ("chi_b", self.chi_b),
            ("chi_w", self.chi_w),
            ("t1", self.t1),
            ("t2_star", self.t2_star),
        ] {
            positive(name, v)?;
        }
        if !(self.f_ro > 0.0 && self.f_ro <= 1.0) {
            return Err(Error::domain("f_ro", self.f_ro, "must lie in (0, 1]"));
        }
        if !(self.p_th_q >= 0.0 && self.p_th_q < 0.5) {
            return Err(Error::domain("p_th_q", self.p_th_q, "must lie in [0, 0.5)"));
        }
        Ok(())
    }

    /// Pump-matching frequency ω_4WM = ω_q + ω_w − χ_w − ω_b.
    pub fn omega_4wm(&self) -> f64 {
        self.omega_q + self.omega_w - self.chi_w - self.omega_b
    }

    /// Cooperativity reached with pump amplitude `xi0`.
    pub fn cooperativity(&self, xi0: f64) -> f64 {
        4.0 * self.chi_b * self.chi_w * xi0 * xi0 / (self.kappa_w * self.kappa_b())
    }

    /// Pump amplitude giving cooperativity `c` (inverse of [`Self::cooperativity`]).
    pub fn xi0_for(&self, c: f64) -> f64 {
        (c * self.kappa_w * self.kappa_b() / (4.0 * self.chi_b * self.chi_w)).sqrt()
    }
}

/// Flux biases and pump settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningState {
    pub phi_b: f64,
    pub phi_pb: f64,
    pub xi0: f64,
    /// Pump detuning from the 4WM matching condition, rad/s.
    pub delta_p: f64,
    pub cooperativity: f64,
    /// Measured detection bandwidth. `None` falls back to the closed-form FWHM.
    pub kappa_d: Option<f64>,
}

impl Default for TuningState {
    fn default() -> Self {
        Self::matched(&DeviceParams::default(), 1.0).with_kappa_d(khz(170.0))
    }
}

impl TuningState {
    /// Resonant pump (δ_p = 0) at cooperativity `c`, zero flux.
    pub fn matched(device: &DeviceParams, c: f64) -> Self {
        Self {
            phi_b: 0.0,
            phi_pb: 0.0,
            xi0: device.xi0_for(c),
            delta_p: 0.0,
            cooperativity: c,
            kappa_d: None,
        }
    }

    pub fn pump_off() -> Self {
        Self {
            phi_b: 0.0,
            phi_pb: 0.0,
            xi0: 0.0,
            delta_p: 0.0,
            cooperativity: 0.0,
            kappa_d: None,
        }
    }

    pub fn with_kappa_d(mut self, kappa_d: f64) -> Self {
        self.kappa_d = Some(kappa_d);
        self
    }

    pub fn with_detuning(mut self, delta_p: f64) -> Self {
        self.delta_p = delta_p;
        self
    }

    /// Effective 4WM coupling g = √(χ_b χ_w) ξ0.
    pub fn g_4wm(&self, device: &DeviceParams) -> f64 {
        (device.chi_b * device.chi_w).sqrt() * self.xi0
    }

    pub fn pump_on(&self) -> bool {
        self.cooperativity > 0.0
    }

    /// Checks C ≥ 0 and that C matches ξ0 to 1e-6 relative.
    pub fn validate(&self, device: &DeviceParams) -> Result<()> {
        non_negative("cooperativity", self.cooperativity)?;
        non_negative("xi0", self.xi0)?;
        if !self.delta_p.is_finite() {
            return Err(Error::domain("delta_p", self.delta_p, "must be finite"));
        }
        if let Some(kd) = self.kappa_d {
            positive("kappa_d", kd)?;
        }
        let c = device.cooperativity(self.xi0);
        let scale = self.cooperativity.max(c).max(1e-300);
        if (c - self.cooperativity).abs() / scale > 1e-6 {
            return Err(Error::invalid(
                "cooperativity",
                format!(
                    "C = {} inconsistent with xi0 = {} (implies C = {c})",
                    self.cooperativity, self.xi0
                ),
            ));
        }
        Ok(())
    }
}

/// Detection / readout / reset cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleTiming {
    pub t_d: f64,
    pub t_ro: f64,
    pub t_reset_unit: f64,
    pub mean_resets_per_cycle: f64,
}

impl Default for CycleTiming {
    fn default() -> Self {
        Self {
            t_d: 15e-6,
            t_ro: 0.8e-6,
            t_reset_unit: 0.8e-6,
            mean_resets_per_cycle: 0.0,
        }
    }
}

impl CycleTiming {
    pub fn cycle_duration(&self) -> f64 {
        self.t_d + self.t_ro + self.mean_resets_per_cycle * self.t_reset_unit
    }

    /// η_cycle = T_d / cycle duration.
    pub fn duty_cycle(&self) -> f64 {
        self.t_d / self.cycle_duration()
    }

    pub fn validate(&self) -> Result<()> {
        positive("t_d", self.t_d)?;
        non_negative("t_ro", self.t_ro)?;
        non_negative("t_reset_unit", self.t_reset_unit)?;
        non_negative("mean_resets_per_cycle", self.mean_resets_per_cycle)?;
        Ok(())
    }

    /// True when the window is long compared to T1 and most excitations decay before readout.
    pub fn exceeds_t1(&self, t1: f64) -> bool {
        self.t_d >= t1
    }
}

/// Thermal environment seen by the detector.
///
/// The input line and the qubit each carry a residual effective temperature
/// (set by wiring and quasiparticles, not by the mixing chamber). The
/// cryostat temperature adds a second Bose–Einstein contribution on top, so
/// sweeping it reproduces the temperature dependence of dark counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEnvironment {
    pub field_temperature: f64,
    /// Explicit buffer-line occupation, overriding both temperatures.
    pub n_th_b: Option<f64>,
    pub qubit_temperature: f64,
    pub cryostat_temperature: f64,
    /// Pump-heating click rate, s⁻¹.
    pub alpha_p: f64,
}

impl Default for NoiseEnvironment {
    fn default() -> Self {
        Self {
            field_temperature: 40.4e-3,
            n_th_b: None,
            qubit_temperature: 43.6e-3,
            cryostat_temperature: 10e-3,
            alpha_p: 2.0,
        }
    }
}

fn occupation(omega: f64, t: f64) -> f64 {
    if t > 0.0 {
        bose_einstein(omega, t).unwrap_or(0.0)
    } else {
        0.0
    }
}

impl NoiseEnvironment {
    /// Thermal photons per mode at the buffer input.
    pub fn n_th_b(&self, omega_b: f64) -> f64 {
        self.n_th_b.unwrap_or_else(|| {
            occupation(omega_b, self.field_temperature)
                + occupation(omega_b, self.cryostat_temperature)
        })
    }

    /// Qubit excited-state population.
    pub fn p_th_q(&self, omega_q: f64) -> f64 {
        occupation(omega_q, self.qubit_temperature) + occupation(omega_q, self.cryostat_temperature)
    }

    pub fn with_cryostat(mut self, t: f64) -> Self {
        self.cryostat_temperature = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("field_temperature", self.field_temperature)?;
        non_negative("qubit_temperature", self.qubit_temperature)?;
        non_negative("cryostat_temperature", self.cryostat_temperature)?;
        non_negative("alpha_p", self.alpha_p)?;
        if let Some(n) = self.n_th_b {
            non_negative("n_th_b", n)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::to_hz;

    #[test]
    fn defaults_are_valid() {
        let d = DeviceParams::default();
        d.validate().unwrap();
        TuningState::default().validate(&d).unwrap();
        CycleTiming::default().validate().unwrap();
        NoiseEnvironment::default().validate().unwrap();
    }

    #[test]
    fn buffer_linewidth_sums_coupling_and_loss() {
        let d = DeviceParams::default();
        assert!((to_hz(d.kappa_b()) / 1e3 - 120.0).abs() < 0.1);
    }

    #[test]
    fn duty_cycle_default() {
        let t = CycleTiming::default();
        assert!((t.duty_cycle() - 15.0 / 15.8).abs() < 1e-12);
        assert!(!t.exceeds_t1(70e-6));
    }

    #[test]
    fn xi0_round_trips_cooperativity() {
        let d = DeviceParams::default();
        for c in [0.0, 0.3, 1.0, 4.0] {
            assert!((d.cooperativity(d.xi0_for(c)) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_cooperativity_rejected() {
        let d = DeviceParams::default();
        let mut t = TuningState::matched(&d, 1.0);
        t.cooperativity = 2.0;
        assert!(t.validate(&d).is_err());
    }

    #[test]
    fn invalid_device_fields_rejected() {
        let mut d = DeviceParams::default();
        d.t1 = -1.0;
        assert!(d.validate().is_err());
        let mut d = DeviceParams::default();
        d.f_ro = 0.0;
        assert!(d.validate().is_err());
        let mut d = DeviceParams::default();
        d.p_th_q = 0.5;
        assert!(d.validate().is_err());
    }

    #[test]
    fn zero_temperatures_give_no_thermal_population() {
        let n = NoiseEnvironment {
            field_temperature: 0.0,
            n_th_b: None,
            qubit_temperature: 0.0,
            cryostat_temperature: 0.0,
            alpha_p: 0.0,
        };
        assert_eq!(n.n_th_b(ghz(7.7)), 0.0);
        assert_eq!(n.p_th_q(ghz(6.533)), 0.0);
    }

    #[test]
    fn explicit_occupation_overrides_temperature() {
        let n = NoiseEnvironment {
            n_th_b: Some(1.5e-4),
            ..Default::default()
        };
        assert_eq!(n.n_th_b(ghz(7.7)), 1.5e-4);
    }
}
