//! Four-wave-mixing transmission from buffer to waste.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Result};

/// |S_w←b(δ, δ_p)|² for signal detuning δ = ω − ω_b and pump detuning δ_p = ω_p − ω_4WM.
pub fn s_4wm(delta: f64, delta_p: f64, c: f64, kappa_b: f64, kappa_w: f64) -> Result<f64> {
    non_negative("C", c)?;
    positive("kappa_b", kappa_b)?;
    positive("kappa_w", kappa_w)?;
    Ok(s_4wm_unchecked(delta, delta_p, c, kappa_b, kappa_w))
}

#[inline]
pub(crate) fn s_4wm_unchecked(delta: f64, delta_p: f64, c: f64, kappa_b: f64, kappa_w: f64) -> f64 {
    let dw = delta + delta_p;
    let den = Complex64::new(
        1.0 + c - 4.0 * delta * dw / (kappa_b * kappa_w),
        2.0 * delta / kappa_b + 2.0 * dw / kappa_w,
    );
    4.0 * c / den.norm_sqr()
}

/// Conversion response over the (pump, signal) frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourWaveMixingSurface {
    pub cooperativity: f64,
    pub kappa_b: f64,
    pub kappa_w: f64,
    pub omega_4wm: f64,
    pub omega_b: f64,
}

impl FourWaveMixingSurface {
    pub fn from_device(device: &crate::DeviceParams, cooperativity: f64) -> Self {
        Self {
            cooperativity,
            kappa_b: device.kappa_b(),
            kappa_w: device.kappa_w,
            omega_4wm: device.omega_4wm(),
            omega_b: device.omega_b,
        }
    }

    /// |S|² at pump frequency `omega_p` and signal frequency `omega`.
    pub fn response(&self, omega_p: f64, omega: f64) -> f64 {
        s_4wm_unchecked(
            omega - self.omega_b,
            omega_p - self.omega_4wm,
            self.cooperativity,
            self.kappa_b,
            self.kappa_w,
        )
    }

    pub fn peak(&self) -> f64 {
        4.0 * self.cooperativity / (1.0 + self.cooperativity).powi(2)
    }
}

/// Full width at half maximum of |S|² along δ at δ_p = 0, found numerically.
pub fn numeric_fwhm(c: f64, kappa_b: f64, kappa_w: f64) -> Result<f64> {
    positive("C", c)?;
    positive("kappa_b", kappa_b)?;
    positive("kappa_w", kappa_w)?;
    let half = 0.5 * s_4wm_unchecked(0.0, 0.0, c, kappa_b, kappa_w);
    let f = |d: f64| s_4wm_unchecked(d, 0.0, c, kappa_b, kappa_w) - half;
    // walk outward until the response falls below half, then bisect the last step
    let step = 0.05 * kappa_b.min(kappa_w);
    let mut lo = 0.0;
    let mut hi = step;
    while f(hi) > 0.0 {
        lo = hi;
        hi += step;
    }
    let root = crate::search::bisect(f, lo, hi, 1e-14)?;
    Ok(2.0 * root)
}
