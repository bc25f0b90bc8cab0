//! Photon-number calibration from Ramsey fringe shift and dephasing.

use num_complex::Complex64;

use crate::error::{non_negative, positive, Error, Result};
use crate::params::DeviceParams;

/// Default tolerance on the phase of the inverted |ε|², in radians.
pub const DEFAULT_PHASE_TOL: f64 = 0.05;

fn response(delta: f64, chi_b: f64, kappa_b: f64) -> Complex64 {
    let k = Complex64::new(kappa_b, chi_b);
    k * k + 4.0 * delta * delta
}

/// (Δ_q, Γ_q) for drive strength |ε|² at buffer detuning δ.
pub fn ramsey_shift(epsilon_sq: f64, delta: f64, chi_b: f64, kappa_b: f64) -> Result<(f64, f64)> {
    non_negative("epsilon_sq", epsilon_sq)?;
    positive("chi_b", chi_b)?;
    positive("kappa_b", kappa_b)?;
    let z = -4.0 * chi_b * epsilon_sq / response(delta, chi_b, kappa_b);
    Ok((z.re, z.im))
}

/// Inverts [`ramsey_shift`]. Returns |ε|² and the phase residual of the inversion.
pub fn invert_ramsey(delta_q: f64, gamma_q: f64, delta: f64, chi_b: f64, kappa_b: f64) -> Result<(f64, f64)> {
    positive("chi_b", chi_b)?;
    positive("kappa_b", kappa_b)?;
    let z = Complex64::new(delta_q, gamma_q);
    let e = -z * response(delta, chi_b, kappa_b) / (4.0 * chi_b);
    if e.norm() == 0.0 {
        return Ok((0.0, 0.0));
    }
    // a consistent pair maps to a positive real |ε|²
    Ok((e.re, e.arg()))
}

/// Photon flux at the buffer input, |ε|²/κ_b,c, from a measured Ramsey shift.
///
/// `epsilon` is the drive amplitude in rate units, so κ_b,c|a_in|² = |ε|².
pub fn photon_flux_from_ramsey(
    delta_q: f64,
    gamma_q: f64,
    delta: f64,
    device: &DeviceParams,
    phase_tol: f64,
) -> Result<f64> {
    let (eps_sq, phase) = invert_ramsey(delta_q, gamma_q, delta, device.chi_b, device.kappa_b())?;
    if phase.abs() > phase_tol {
        return Err(Error::InconsistentRamseyPhase { phase_error: phase });
    }
    Ok(eps_sq.max(0.0) / device.kappa_b_c)
}

/// Drive strength |ε|² that delivers `flux` photons/s.
pub fn epsilon_sq_for_flux(flux: f64, device: &DeviceParams) -> f64 {
    flux * device.kappa_b_c
}
