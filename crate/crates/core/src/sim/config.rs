use serde::{Deserialize, Serialize};

use crate::constants::mhz;
use crate::error::{non_negative, positive, Error, Result};
use crate::figures::{conversion_efficiency, eta_q};
use crate::params::{CycleTiming, DeviceParams, NoiseEnvironment, TuningState};

/// Single spin relaxing radiatively after each excitation pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSource {
    pub gamma_r: f64,
    pub eta_reso: f64,
    pub eta_loss: f64,
    pub pulse_period: f64,
    /// Probability that a π pulse leaves the spin excited.
    pub excitation_probability: f64,
    /// Extra uniform click rate from the measurement wiring, s⁻¹.
    pub excess_background: f64,
}

impl SpinSource {
    /// Er³⁺ spin with 1.24 ms radiative lifetime and a 10 ms repetition period.
    pub fn reference() -> Self {
        Self {
            gamma_r: 1.0 / 1.24e-3,
            eta_reso: 0.6,
            eta_loss: 0.85,
            pulse_period: 10e-3,
            excitation_probability: 1.0,
            excess_background: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSource {
    None,
    /// Weak continuous tone, `flux` photons/s at angular frequency `omega`.
    Coherent { flux: f64, omega: f64 },
    Spin(SpinSource),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResetMode {
    /// One reset round per click, always returning the qubit to ground.
    Ideal,
    /// Conditional π pulses with success `f_pi`, re-reading up to `max_rounds` times.
    Imperfect { f_pi: f64, max_rounds: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub device: DeviceParams,
    pub tuning: TuningState,
    pub timing: CycleTiming,
    pub noise: NoiseEnvironment,
    pub signal: SignalSource,
    pub duration: f64,
    pub rng_seed: u64,
    pub reset: ResetMode,
    /// P(click | ground) of the readout.
    pub readout_false_positive: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            device: DeviceParams::default(),
            tuning: TuningState::default(),
            timing: CycleTiming::default(),
            noise: NoiseEnvironment::default(),
            signal: SignalSource::None,
            duration: 1.0,
            rng_seed: 0,
            reset: ResetMode::Ideal,
            readout_false_positive: 1e-7,
        }
    }
}

/// Pump detuning used for the "detuned" dark-count protocol.
pub fn detuned_pump_offset() -> f64 {
    mhz(20.0)
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.tuning.validate(&self.device)?;
        self.timing.validate()?;
        self.noise.validate()?;
        non_negative("duration", self.duration)?;
        if !(self.readout_false_positive >= 0.0 && self.readout_false_positive < 0.5) {
            return Err(Error::domain(
                "readout_false_positive",
                self.readout_false_positive,
                "must lie in [0, 0.5)",
            ));
        }
        match self.signal {
            SignalSource::None => {}
            SignalSource::Coherent { flux, omega } => {
                non_negative("flux", flux)?;
                positive("omega", omega)?;
            }
            SignalSource::Spin(s) => {
                positive("gamma_r", s.gamma_r)?;
                positive("pulse_period", s.pulse_period)?;
                non_negative("excess_background", s.excess_background)?;
                for (n, v) in [
                    ("eta_reso", s.eta_reso),
                    ("eta_loss", s.eta_loss),
                    ("excitation_probability", s.excitation_probability),
                ] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::domain(n, v, "must lie in [0, 1]"));
                    }
                }
            }
        }
        if let ResetMode::Imperfect { f_pi, max_rounds } = self.reset {
            if !(0.0..=1.0).contains(&f_pi) {
                return Err(Error::domain("f_pi", f_pi, "must lie in [0, 1]"));
            }
            if max_rounds == 0 {
                return Err(Error::invalid("max_rounds", "at least one reset round"));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn with_signal(mut self, signal: SignalSource) -> Self {
        self.signal = signal;
        self
    }

    /// Same device with the pump switched off.
    pub fn pump_off(mut self) -> Self {
        let kd = self.tuning.kappa_d;
        self.tuning = TuningState::pump_off();
        self.tuning.kappa_d = kd;
        self
    }

    /// Same device with the pump detuned from the 4WM condition by `delta_p`.
    pub fn pump_detuned(mut self, delta_p: f64) -> Self {
        self.tuning.delta_p = delta_p;
        self
    }

    /// Effective readout fidelity that makes η_SMPD(ω_b) equal `target`.
    ///
    /// The analytic product of the factors falls short of the measured
    /// on-resonance efficiency; the remainder is absorbed into F_RO.
    pub fn calibrated_to_efficiency(mut self, target: f64) -> Result<Self> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::domain("target", target, "must lie in (0, 1]"));
        }
        let rest = conversion_efficiency(&self.device, &self.tuning)?
            * eta_q(self.timing.t_d, self.device.t1)?
            * self.timing.duty_cycle();
        let f = target / rest;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::invalid(
                "target",
                format!("efficiency {target} needs readout fidelity {f}, outside (0, 1]"),
            ));
        }
        self.device.f_ro = f;
        Ok(self)
    }
}

/// Deterministic per-task seed from a base seed (SplitMix64 finaliser).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
