//! Physical constants (CODATA 2018 exact / recommended values) and unit helpers.
//!
//! Every angular frequency in this crate is stored in rad/s. Conversions to
//! and from cyclic frequency happen only at I/O boundaries, through the
//! helpers below.

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Magnetic flux quantum h/2e, Wb.
pub const PHI_0: f64 = 2.067_833_848e-15;

pub const TWO_PI: f64 = 2.0 * PI;

/// Cyclic frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn hz(f: f64) -> f64 {
    TWO_PI * f
}

#[inline]
pub fn khz(f: f64) -> f64 {
    TWO_PI * f * 1e3
}

#[inline]
pub fn mhz(f: f64) -> f64 {
    TWO_PI * f * 1e6
}

#[inline]
pub fn ghz(f: f64) -> f64 {
    TWO_PI * f * 1e9
}

/// Angular frequency (rad/s) back to cyclic frequency (Hz).
#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}
