//! Exponential decay on a background, for fluorescence histograms.

use serde::{Deserialize, Serialize};

use super::lm::{finish, levenberg_marquardt, param, FitError, FitResult, LmOptions};
use super::thermal::fit_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub fit: FitResult,
    pub rate: f64,
    pub amplitude: f64,
    pub background: f64,
    /// ∫ A e^(−Γt) dt = A/Γ, in counts·(time unit) per bin width.
    pub area: f64,
    pub area_sigma: f64,
}

impl ExponentialFit {
    /// Detected photons per repetition: area / (bin width · repetitions).
    pub fn efficiency(&self, bin_width: f64, repetitions: usize) -> f64 {
        self.area / (bin_width * repetitions as f64)
    }
}

fn deviance_residual(y: f64, mu: f64) -> f64 {
    let d = if y > 0.0 { mu - y + y * (y / mu).ln() } else { mu };
    (2.0 * d.max(0.0)).sqrt().copysign(y - mu)
}

/// Fits counts(t) = A e^(−Γt) + B by Poisson maximum likelihood.
pub fn fit_exponential_decay(bins: &[(f64, f64)]) -> Result<ExponentialFit, FitError> {
    if bins.len() < 6 {
        return Err(FitError::InsufficientData { needed: 6, got: bins.len() });
    }
    if bins.iter().any(|&(t, c)| !t.is_finite() || !c.is_finite() || c < 0.0) {
        return Err(FitError::InvalidInput("counts must be finite and non-negative".into()));
    }
    let t_max = bins.iter().map(|b| b.0.abs()).fold(0.0, f64::max);
    if !(t_max > 0.0) {
        return Err(FitError::Degenerate("zero time span".into()));
    }
    let c_scale = bins.iter().map(|b| b.1).fold(0.0, f64::max).max(1.0);
    let u: Vec<f64> = bins.iter().map(|b| b.0 / t_max).collect();
    let v: Vec<f64> = bins.iter().map(|b| b.1 / c_scale).collect();
    let w: Vec<f64> = bins.iter().map(|b| c_scale / b.1.max(1.0).sqrt()).collect();

    // background from the last fifth, decay rate from a log-linear fit of the excess
    let tail = (bins.len() / 5).max(1);
    let b0 = v[v.len() - tail..].iter().sum::<f64>() / tail as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = u
        .iter()
        .zip(&v)
        .filter(|(_, &y)| y - b0 > 0.0)
        .take(bins.len() / 2)
        .map(|(&x, &y)| (x, (y - b0).ln()))
        .unzip();
    let (a0, g0) = match fit_linear(&xs, &ys, None) {
        Ok(f) if f.value("slope") < 0.0 => (f.value("intercept").exp(), -f.value("slope")),
        _ => ((v[0] - b0).max(0.0), 3.0),
    };
    let p0 = [a0, g0.clamp(0.1, 1e3), b0];

    let n = u.len();
    // weighted least squares for a start, then Poisson likelihood via deviance residuals
    let start = levenberg_marquardt(
        |p, r| {
            for i in 0..n {
                r[i] = w[i] * (p[0] * (-p[1] * u[i]).exp() + p[2] - v[i]);
            }
        },
        &p0,
        n,
        &LmOptions::default(),
    )?;
    let counts: Vec<f64> = bins.iter().map(|b| b.1).collect();
    let sol = levenberg_marquardt(
        |p, r| {
            for i in 0..n {
                let mu = (c_scale * (p[0] * (-p[1] * u[i]).exp() + p[2])).max(1e-9);
                r[i] = deviance_residual(counts[i], mu);
            }
        },
        &start.params,
        n,
        &LmOptions::default(),
    )?;
    let cov = &sol.covariance;
    let sig = |i: usize| cov[(i, i)].max(0.0).sqrt();
    let p = &sol.params;
    let rate = p[1] / t_max;
    let amplitude = p[0] * c_scale;
    let background = p[2] * c_scale;
    // area = A/Γ, with correlated error propagation
    let area = amplitude / rate;
    let (da, dg) = (1.0 / p[1], -p[0] / (p[1] * p[1]));
    let var_area_u = da * da * cov[(0, 0)] + dg * dg * cov[(1, 1)] + 2.0 * da * dg * cov[(0, 1)];
    let area_sigma = var_area_u.max(0.0).sqrt() * c_scale * t_max;
    let fit = finish(
        &sol,
        vec![
            param("rate", rate, sig(1) / t_max),
            param("amplitude", amplitude, sig(0) * c_scale),
            param("background", background, sig(2) * c_scale),
        ],
    )?;
    Ok(ExponentialFit {
        fit,
        rate,
        amplitude,
        background,
        area,
        area_sigma,
    })
}
