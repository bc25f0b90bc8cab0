//! Resonance line-shape fits.

use serde::{Deserialize, Serialize};

use super::lm::{finish, levenberg_marquardt, param, FitError, FitResult, LmOptions};

/// Lorentzian fit in the units of the supplied abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub fit: FitResult,
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub baseline: f64,
    /// Over-coupled (coupling, internal) split of the FWHM when the line is a reflection dip.
    pub coupling_split: Option<(f64, f64)>,
}

/// y = B + A / (1 + (2(x − x0)/w)²).
pub fn lorentzian(x: f64, center: f64, fwhm: f64, amplitude: f64, baseline: f64) -> f64 {
    let u = 2.0 * (x - center) / fwhm;
    baseline + amplitude / (1.0 + u * u)
}

/// Reflection |S11|² of a one-port resonator with coupling and internal rates `kc`, `ki`.
pub fn reflection_power(delta: f64, kc: f64, ki: f64) -> f64 {
    let k = kc + ki;
    1.0 - 4.0 * kc * ki / (k * k) / (1.0 + (2.0 * delta / k).powi(2))
}

/// Splits a reflection dip of FWHM κ and depth D = 4κ_cκ_i/κ² assuming κ_c ≥ κ_i.
pub fn coupling_split(fwhm: f64, depth: f64) -> Option<(f64, f64)> {
    if !(depth > 0.0 && depth <= 1.0) {
        return None;
    }
    let r = (1.0 - depth).sqrt();
    Some((0.5 * fwhm * (1.0 + r), 0.5 * fwhm * (1.0 - r)))
}

/// Least-squares Lorentzian fit to `(x, y)` samples.
pub fn fit_lorentzian(samples: &[(f64, f64)]) -> Result<LorentzianFit, FitError> {
    if samples.len() < 8 {
        return Err(FitError::InsufficientData { needed: 8, got: samples.len() });
    }
    if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::InvalidInput("non-finite sample".into()));
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x_lo = pts[0].0;
    let x_hi = pts[pts.len() - 1].0;
    let span = x_hi - x_lo;
    if !(span > 0.0) {
        return Err(FitError::Degenerate("all samples at the same abscissa".into()));
    }
    let x_mid = 0.5 * (x_lo + x_hi);
    let y_scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let y_min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if !(y_max - y_min > 1e-12 * y_scale.max(f64::MIN_POSITIVE)) {
        return Err(FitError::Degenerate("flat data".into()));
    }

    let u: Vec<f64> = pts.iter().map(|p| (p.0 - x_mid) / span).collect();
    let v: Vec<f64> = pts.iter().map(|p| p.1 / y_scale).collect();

    // baseline from the outer tenth on each side
    let edge = (pts.len() / 10).max(1);
    let b0 = (v[..edge].iter().sum::<f64>() + v[v.len() - edge..].iter().sum::<f64>()) / (2 * edge) as f64;
    let (i_ext, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1 - b0).abs().total_cmp(&(b.1 - b0).abs()))
        .unwrap();
    let a0 = v[i_ext] - b0;
    let above = v.iter().filter(|&&y| (y - b0) / a0 > 0.5).count().max(1);
    let w0 = (above as f64 / pts.len() as f64).max(2.0 / pts.len() as f64);
    let p0 = [u[i_ext], w0, a0, b0];

    let n = u.len();
    let sol = levenberg_marquardt(
        |p, r| {
            for i in 0..n {
                r[i] = lorentzian(u[i], p[0], p[1], p[2], p[3]) - v[i];
            }
        },
        &p0,
        n,
        &LmOptions::default(),
    )?;
    let s2 = sol.reduced_chi2();
    let sig = |i: usize| (sol.covariance[(i, i)] * s2).max(0.0).sqrt();

    let center = x_mid + sol.params[0] * span;
    let fwhm = sol.params[1].abs() * span;
    let amplitude = sol.params[2] * y_scale;
    let baseline = sol.params[3] * y_scale;
    let fit = finish(
        &sol,
        vec![
            param("center", center, sig(0) * span),
            param("fwhm", fwhm, sig(1) * span),
            param("amplitude", amplitude, sig(2) * y_scale),
            param("baseline", baseline, sig(3) * y_scale),
        ],
    )?;
    let split = if amplitude < 0.0 && baseline > 0.0 {
        coupling_split(fwhm, -amplitude / baseline)
    } else {
        None
    };
    Ok(LorentzianFit {
        fit,
        center,
        fwhm,
        amplitude,
        baseline,
        coupling_split: split,
    })
}
