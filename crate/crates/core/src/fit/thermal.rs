//! Linear fits of dark-count rates against thermal occupation and bandwidth.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{invert_normal, param, FitError, FitResult};
use crate::figures::bose_einstein;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalBranch {
    /// Rate against the buffer-line occupation n̄_th,b(T).
    Thermal,
    /// Rate against the qubit excited population p_th,q(T).
    Qubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub temperature: f64,
    pub rate: f64,
    /// Absolute 1σ on the rate; `None` means unknown (uniform weights).
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalFit {
    pub fit: FitResult,
    pub branch: ThermalBranch,
    pub rate_0: f64,
    pub k: f64,
}

/// Weighted straight line y = a + b x. Returns a FitResult with `intercept` and `slope`.
///
/// With absolute sigmas on every point the covariance is used as is;
/// otherwise it is scaled by the reduced χ².
pub fn fit_linear(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<FitResult, FitError> {
    let n = x.len();
    if n != y.len() || sigma.is_some_and(|s| s.len() != n) {
        return Err(FitError::InvalidInput("length mismatch".into()));
    }
    if n < 3 {
        return Err(FitError::InsufficientData { needed: 3, got: n });
    }
    if let Some(s) = sigma {
        if s.iter().any(|&v| !(v > 0.0)) {
            return Err(FitError::InvalidInput("sigmas must be positive".into()));
        }
    }
    // centre and scale x so the normal matrix is well conditioned
    let xm = x.iter().sum::<f64>() / n as f64;
    let xs = x.iter().map(|v| (v - xm).abs()).fold(0.0, f64::max);
    if !(xs > 0.0) {
        return Err(FitError::Degenerate("all abscissae equal".into()));
    }
    let w: Vec<f64> = (0..n).map(|i| sigma.map_or(1.0, |s| 1.0 / s[i])).collect();
    let a = DMatrix::from_fn(n, 2, |i, k| w[i] * if k == 0 { 1.0 } else { (x[i] - xm) / xs });
    let b = DVector::from_fn(n, |i, _| w[i] * y[i]);
    let ata = a.transpose() * &a;
    let cov = invert_normal(&ata)?;
    let sol = &cov * (a.transpose() * &b);
    let resid = &a * &sol - &b;
    let chi2 = resid.norm_squared();
    let dof = (n - 2) as f64;
    let s2 = if sigma.is_some() { 1.0 } else { chi2 / dof };
    let (c0, c1) = (sol[0], sol[1]);
    let slope = c1 / xs;
    let intercept = c0 - slope * xm;
    let var_slope = cov[(1, 1)] / (xs * xs) * s2;
    let var_int = (cov[(0, 0)] + xm * xm / (xs * xs) * cov[(1, 1)] - 2.0 * xm / xs * cov[(0, 1)]) * s2;
    Ok(FitResult {
        parameters: vec![
            param("intercept", intercept, var_int.max(0.0).sqrt()),
            param("slope", slope, var_slope.max(0.0).sqrt()),
        ],
        residual_norm: chi2.sqrt(),
        reduced_chi2: chi2 / dof,
        converged: true,
        iterations: 1,
    })
}

/// Fits rate(T) = rate_0 + K·x(T), with x the Bose–Einstein occupation at `omega`.
pub fn fit_thermal_model(points: &[RatePoint], branch: ThermalBranch, omega: f64) -> Result<ThermalFit, FitError> {
    if points.len() < 4 {
        return Err(FitError::InsufficientData { needed: 4, got: points.len() });
    }
    let mut x = Vec::with_capacity(points.len());
    for p in points {
        let occ = bose_einstein(omega, p.temperature)
            .map_err(|e| FitError::InvalidInput(format!("temperature {}: {e}", p.temperature)))?;
        x.push(occ);
    }
    let y: Vec<f64> = points.iter().map(|p| p.rate).collect();
    let sig: Option<Vec<f64>> = points.iter().map(|p| p.sigma).collect();
    let lin = fit_linear(&x, &y, sig.as_deref())?;
    let (r0, k) = (lin.get("intercept").unwrap().clone(), lin.get("slope").unwrap().clone());
    Ok(ThermalFit {
        rate_0: r0.value,
        k: k.value,
        branch,
        fit: FitResult {
            parameters: vec![param("rate_0", r0.value, r0.sigma), param("K", k.value, k.sigma)],
            ..lin
        },
    })
}
