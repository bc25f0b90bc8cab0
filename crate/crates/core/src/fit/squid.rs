//! Flux-tuning curve fits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lm::{finish, levenberg_marquardt, param, FitError, FitResult, LmOptions};
use crate::tuning::squid::{buffer_frequency, purcell_frequency_unclipped, SquidTuningModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub fit: FitResult,
    pub mean: f64,
    pub amplitude: f64,
    pub flux_offset: f64,
}

/// ω(Φ) = ω̄ + A cos(2π(Φ − Φ_off)), period one flux quantum.
pub fn fit_sinusoid(points: &[(f64, f64)]) -> Result<SinusoidFit, FitError> {
    let n = points.len();
    if n < 4 {
        return Err(FitError::InsufficientData { needed: 4, got: n });
    }
    let mean0 = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let scale = points.iter().map(|p| (p.1 - mean0).abs()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(FitError::Degenerate("flat tuning curve".into()));
    }
    // linear start: y = m + a cos + b sin
    let (mut a, mut b) = (0.0, 0.0);
    for &(phi, y) in points {
        let (s, c) = (2.0 * PI * phi).sin_cos();
        a += 2.0 * (y - mean0) * c / n as f64;
        b += 2.0 * (y - mean0) * s / n as f64;
    }
    let amp0 = (a * a + b * b).sqrt() / scale;
    let off0 = b.atan2(a) / (2.0 * PI);
    let sol = levenberg_marquardt(
        |p, r| {
            for (i, &(phi, y)) in points.iter().enumerate() {
                r[i] = p[0] + p[1] * (2.0 * PI * (phi - p[2])).cos() - (y - mean0) / scale;
            }
        },
        &[0.0, amp0.max(1e-3), off0],
        n,
        &LmOptions::default(),
    )?;
    let s2 = sol.reduced_chi2();
    let sig = |i: usize| (sol.covariance[(i, i)] * s2).max(0.0).sqrt();
    let p = &sol.params;
    // fold to A ≥ 0 and Φ_off ∈ (−½, ½]
    let (amp, mut off) = if p[1] < 0.0 { (-p[1], p[2] + 0.5) } else { (p[1], p[2]) };
    off -= off.round();
    let mean = mean0 + p[0] * scale;
    let fit = finish(
        &sol,
        vec![
            param("mean", mean, sig(0) * scale),
            param("amplitude", amp * scale, sig(1) * scale),
            param("flux_offset", off, sig(2)),
        ],
    )?;
    Ok(SinusoidFit {
        fit,
        mean,
        amplitude: amp * scale,
        flux_offset: off,
    })
}

/// Fits ω_max, asymmetry and offset of the exact SQUID model at fixed participation.
pub fn fit_squid_exact(points: &[(f64, f64)], participation: f64) -> Result<(SquidTuningModel, FitResult), FitError> {
    let n = points.len();
    if n < 5 {
        return Err(FitError::InsufficientData { needed: 5, got: n });
    }
    let start = fit_sinusoid(points)?;
    let w_max0 = start.mean + start.amplitude;
    let w_min0 = start.mean - start.amplitude;
    // invert the half-flux frequency for a starting asymmetry
    let r = w_max0 / w_min0;
    let d0 = (1.0 / (1.0 + (r * r - 1.0) / participation)).clamp(0.01, 0.999);
    let model = |p: &[f64]| SquidTuningModel {
        omega_max: w_max0 * (1.0 + p[0] * 1e-3),
        asymmetry: p[1],
        flux_offset: p[2],
        participation,
        kind: crate::tuning::squid::SquidModelKind::SquidExact,
    };
    let scale = start.amplitude;
    let sol = levenberg_marquardt(
        |p, res| {
            let m = model(p);
            for (i, &(phi, y)) in points.iter().enumerate() {
                res[i] = (buffer_frequency(phi, &m) - y) / scale;
            }
        },
        &[0.0, d0, start.flux_offset],
        n,
        &LmOptions::default(),
    )?;
    let s2 = sol.reduced_chi2();
    let sig = |i: usize| (sol.covariance[(i, i)] * s2).max(0.0).sqrt();
    let m = model(&sol.params);
    let fit = finish(
        &sol,
        vec![
            param("omega_max", m.omega_max, sig(0) * 1e-3 * w_max0),
            param("asymmetry", m.asymmetry, sig(1)),
            param("flux_offset", m.flux_offset, sig(2)),
        ],
    )?;
    Ok((m, fit))
}

/// Fits ω_max and offset of a symmetric-SQUID Purcell curve (points inside the unclipped range).
pub fn fit_purcell_curve(points: &[(f64, f64)]) -> Result<FitResult, FitError> {
    let n = points.len();
    if n < 4 {
        return Err(FitError::InsufficientData { needed: 4, got: n });
    }
    let w0 = points.iter().map(|p| p.1).fold(0.0, f64::max);
    if !(w0 > 0.0) {
        return Err(FitError::InvalidInput("frequencies must be positive".into()));
    }
    let sol = levenberg_marquardt(
        |p, r| {
            for (i, &(phi, y)) in points.iter().enumerate() {
                r[i] = purcell_frequency_unclipped(phi, w0 * (1.0 + 1e-2 * p[0]), p[1]) / w0 - y / w0;
            }
        },
        &[0.0, 1e-3],
        n,
        &LmOptions::default(),
    )?;
    let s2 = sol.reduced_chi2();
    let sig = |i: usize| (sol.covariance[(i, i)] * s2).max(0.0).sqrt();
    finish(
        &sol,
        vec![
            param("omega_max", w0 * (1.0 + 1e-2 * sol.params[0]), sig(0) * 1e-2 * w0),
            param("flux_offset", sol.params[1], sig(1)),
        ],
    )
}
