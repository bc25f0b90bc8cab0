//! Flux-tunable SQUID resonator models for the buffer and its Purcell filter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::ghz;
use crate::error::{positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SquidModelKind {
    SinusoidalApprox,
    SquidExact,
}

/// Frequency of a resonator loaded by an asymmetric SQUID.
///
/// The SQUID inductance scales as 1/√f(Φ) with
/// f = cos²(πΦ) + d² sin²(πΦ). Only a fraction `participation` of the mode
/// inductance sits in the SQUID, so
/// ω/ω_max = [1 + p (f^(−1/2) − 1)]^(−1/2). With p = 1 this is the bare
/// junction-dominated form ω_max·f^(1/4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquidTuningModel {
    pub omega_max: f64,
    pub asymmetry: f64,
    pub flux_offset: f64,
    pub participation: f64,
    pub kind: SquidModelKind,
}

impl SquidTuningModel {
    pub fn exact(omega_max: f64, asymmetry: f64) -> Self {
        Self {
            omega_max,
            asymmetry,
            flux_offset: 0.0,
            participation: 1.0,
            kind: SquidModelKind::SquidExact,
        }
    }

    /// Exact model whose participation is chosen so the sweet spot sits at
    /// `omega_max` and half-flux at `omega_min`.
    pub fn calibrated(omega_max: f64, omega_min: f64, asymmetry: f64) -> Result<Self> {
        positive("omega_max", omega_max)?;
        positive("omega_min", omega_min)?;
        if omega_min >= omega_max {
            return Err(Error::invalid("omega_min", "must be below omega_max"));
        }
        if !(asymmetry > 0.0 && asymmetry < 1.0) {
            return Err(Error::domain("asymmetry", asymmetry, "must lie in (0, 1)"));
        }
        let r = omega_max / omega_min;
        let participation = (r * r - 1.0) / (1.0 / asymmetry - 1.0);
        Ok(Self {
            participation,
            ..Self::exact(omega_max, asymmetry)
        })
    }

    /// Buffer SQUID calibrated to the 7.70–7.76 GHz range and junction ratio 15.
    pub fn reference_buffer() -> Self {
        Self::calibrated(ghz(7.76), ghz(7.70), asymmetry_from_ratio(15.0)).expect("valid constants")
    }

    pub fn as_sinusoidal(mut self) -> Self {
        self.kind = SquidModelKind::SinusoidalApprox;
        self
    }

    fn exact_frequency(&self, phi: f64) -> f64 {
        let (s, c) = (PI * (phi - self.flux_offset)).sin_cos();
        let f = c * c + self.asymmetry * self.asymmetry * s * s;
        if f <= 0.0 {
            return 0.0;
        }
        let inv = 1.0 + self.participation * (1.0 / f.sqrt() - 1.0);
        self.omega_max / inv.sqrt()
    }

    /// Lowest frequency of the exact model, reached at half a flux quantum from the offset.
    pub fn omega_min(&self) -> f64 {
        self.exact_frequency(self.flux_offset + 0.5)
    }

    /// Mean and amplitude (ω̄, A) of the equivalent sinusoid.
    pub fn sinusoid_coefficients(&self) -> (f64, f64) {
        let lo = self.omega_min();
        (0.5 * (self.omega_max + lo), 0.5 * (self.omega_max - lo))
    }
}

/// SQUID asymmetry d = (r − 1)/(r + 1) from the junction critical-current ratio r.
pub fn asymmetry_from_ratio(r: f64) -> f64 {
    (r - 1.0) / (r + 1.0)
}

/// Inverse of [`asymmetry_from_ratio`].
pub fn ratio_from_asymmetry(d: f64) -> f64 {
    (1.0 + d) / (1.0 - d)
}

/// Buffer frequency at flux `phi` (units of Φ0).
pub fn buffer_frequency(phi: f64, model: &SquidTuningModel) -> f64 {
    match model.kind {
        SquidModelKind::SquidExact => model.exact_frequency(phi),
        SquidModelKind::SinusoidalApprox => {
            let (mean, amp) = model.sinusoid_coefficients();
            mean + amp * (2.0 * PI * (phi - model.flux_offset)).cos()
        }
    }
}

/// Measured Purcell-filter range, rad/s.
pub const PURCELL_RANGE: (f64, f64) = (2.0 * PI * 7.26 * 1e9, 2.0 * PI * 7.78 * 1e9);

/// Purcell filter frequency ω_max √|cos πΦ| for a symmetric SQUID, clipped to [`PURCELL_RANGE`].
pub fn purcell_frequency(phi: f64, model: &SquidTuningModel) -> Result<f64> {
    if model.asymmetry != 0.0 {
        return Err(Error::invalid("asymmetry", "Purcell SQUID is symmetric (d = 0)"));
    }
    let c = (PI * (phi - model.flux_offset)).cos().abs();
    if c < 1e-12 {
        return Err(Error::domain("phi_pb", phi, "frequency collapses at half-integer flux"));
    }
    Ok((model.omega_max * c.sqrt()).clamp(PURCELL_RANGE.0, PURCELL_RANGE.1))
}

/// Unclipped symmetric-SQUID frequency, used by fits inside the measured range.
pub fn purcell_frequency_unclipped(phi: f64, omega_max: f64, flux_offset: f64) -> f64 {
    omega_max * (PI * (phi - flux_offset)).cos().abs().sqrt()
}
