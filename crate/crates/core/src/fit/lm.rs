//! Levenberg–Marquardt least squares on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged when every parameter step is below `step_tol · (|p| + step_tol)`.
    pub step_tol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tol: 1e-9,
            fd_step: 1e-6,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    /// √(Σ r²) of the weighted residuals at the optimum.
    pub residual_norm: f64,
    /// χ² per degree of freedom.
    pub reduced_chi2: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of parameter `name`. Panics if the fitter does not produce it.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter `{name}`")).value
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter `{name}`")).sigma
    }

    /// |fitted − truth| / σ for parameter `name`.
    pub fn pull(&self, name: &str, truth: f64) -> f64 {
        let p = self.get(name).unwrap_or_else(|| panic!("no fit parameter `{name}`"));
        (p.value - truth).abs() / p.sigma
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("no significant signal in data: {0}")]
    NoSignal(String),
    #[error("fit did not converge after {} iterations", .0.iterations)]
    NotConverged(Box<FitResult>),
}

/// Raw solver output in the solver's own parametrisation.
#[derive(Debug, Clone)]
pub struct LmSolution {
    pub params: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl LmSolution {
    pub fn sigma(&self, i: usize) -> f64 {
        self.covariance[(i, i)].max(0.0).sqrt()
    }

    pub fn reduced_chi2(&self) -> f64 {
        self.chi2 / self.dof.max(1) as f64
    }
}

fn eval<F: Fn(&[f64], &mut [f64])>(f: &F, p: &[f64], r: &mut [f64]) -> f64 {
    f(p, r);
    r.iter().map(|x| x * x).sum()
}

fn jacobian<F: Fn(&[f64], &mut [f64])>(f: &F, p: &[f64], m: usize, h_rel: f64) -> DMatrix<f64> {
    let n = p.len();
    let mut j = DMatrix::zeros(m, n);
    let mut rp = vec![0.0; m];
    let mut rm = vec![0.0; m];
    let mut q = p.to_vec();
    for k in 0..n {
        let h = h_rel * p[k].abs().max(1e-3);
        q[k] = p[k] + h;
        f(&q, &mut rp);
        q[k] = p[k] - h;
        f(&q, &mut rm);
        q[k] = p[k];
        for i in 0..m {
            j[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    j
}

/// Minimises Σ r_i(p)² where `residuals(p, r)` fills the weighted residual vector `r` of length `m`.
///
/// Parameters should be scaled to order unity by the caller. The returned
/// covariance is (JᵀJ)⁻¹ unscaled; callers multiply by the reduced χ² when
/// the residual weights are relative rather than absolute.
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], m: usize, opts: &LmOptions) -> Result<LmSolution, FitError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = p0.len();
    if m <= n {
        return Err(FitError::InsufficientData { needed: n + 1, got: m });
    }
    let mut p = p0.to_vec();
    let mut r = vec![0.0; m];
    let mut cost = eval(&residuals, &p, &mut r);
    if !cost.is_finite() {
        return Err(FitError::InvalidInput("non-finite residuals at the initial guess".into()));
    }
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; m];
    let mut q = vec![0.0; n];

    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        let j = jacobian(&residuals, &p, m, opts.fd_step);
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let diag_max = (0..n).map(|k| a[(k, k)]).fold(0.0, f64::max);
        if diag_max == 0.0 {
            return Err(FitError::Degenerate("residuals do not depend on any parameter".into()));
        }
        loop {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-12 * diag_max);
            }
            let step = match damped.cholesky() {
                Some(ch) => -ch.solve(&g),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        break 'outer;
                    }
                    continue;
                }
            };
            for k in 0..n {
                q[k] = p[k] + step[k];
            }
            let new_cost = eval(&residuals, &q, &mut trial);
            if new_cost.is_finite() && new_cost <= cost {
                let small_step = (0..n).all(|k| step[k].abs() <= opts.step_tol * (p[k].abs() + opts.step_tol));
                let small_gain = cost - new_cost <= 1e-15 * cost;
                p.copy_from_slice(&q);
                std::mem::swap(&mut r, &mut trial);
                cost = new_cost;
                lambda = (lambda / 10.0).max(1e-15);
                if small_step || small_gain {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                // no downhill direction left: we are at a minimum to machine precision
                converged = true;
                break 'outer;
            }
        }
    }

    let j = jacobian(&residuals, &p, m, opts.fd_step);
    let a = j.transpose() * &j;
    let covariance = invert_normal(&a)?;
    Ok(LmSolution {
        params: p,
        covariance,
        chi2: cost,
        dof: m - n,
        iterations,
        converged,
    })
}

/// Inverse of a symmetric normal matrix, rejecting (near-)singular systems.
pub fn invert_normal(a: &DMatrix<f64>) -> Result<DMatrix<f64>, FitError> {
    let n = a.nrows();
    // Jacobi scaling so the conditioning test is independent of parameter units
    let d: Vec<f64> = (0..n).map(|k| a[(k, k)]).collect();
    if d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(FitError::Degenerate("a parameter has no influence on the residuals".into()));
    }
    let s = DMatrix::from_fn(n, n, |i, k| a[(i, k)] / (d[i] * d[k]).sqrt());
    let eig = s.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(min > 1e-13 * max) {
        return Err(FitError::Degenerate("parameters are not independently determined".into()));
    }
    let inv = s
        .try_inverse()
        .ok_or_else(|| FitError::Degenerate("singular normal matrix".into()))?;
    Ok(DMatrix::from_fn(n, n, |i, k| inv[(i, k)] / (d[i] * d[k]).sqrt()))
}

pub(crate) fn param(name: &str, value: f64, sigma: f64) -> FitParameter {
    FitParameter {
        name: name.to_string(),
        value,
        sigma,
    }
}

/// Wraps solver output, turning an unconverged run into [`FitError::NotConverged`].
pub(crate) fn finish(sol: &LmSolution, parameters: Vec<FitParameter>) -> Result<FitResult, FitError> {
    let res = FitResult {
        parameters,
        residual_norm: sol.chi2.sqrt(),
        reduced_chi2: sol.reduced_chi2(),
        converged: sol.converged,
        iterations: sol.iterations,
    };
    if sol.converged {
        Ok(res)
    } else {
        Err(FitError::NotConverged(Box::new(res)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential_exactly() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * (-1.3 * x).exp()).collect();
        let sol = levenberg_marquardt(
            |p, r| {
                for i in 0..xs.len() {
                    r[i] = p[0] * (-p[1] * xs[i]).exp() - ys[i];
                }
            },
            &[1.0, 0.5],
            xs.len(),
            &LmOptions::default(),
        )
        .unwrap();
        assert!(sol.converged);
        assert!((sol.params[0] - 2.5).abs() < 1e-8);
        assert!((sol.params[1] - 1.3).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock_minimum() {
        let sol = levenberg_marquardt(
            |p, r| {
                r[0] = 10.0 * (p[1] - p[0] * p[0]);
                r[1] = 1.0 - p[0];
                r[2] = 0.0;
            },
            &[-1.2, 1.0],
            3,
            &LmOptions::default(),
        )
        .unwrap();
        assert!((sol.params[0] - 1.0).abs() < 1e-6);
        assert!((sol.params[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn too_few_points() {
        let r = levenberg_marquardt(|_, r| r.fill(0.0), &[1.0, 2.0], 2, &LmOptions::default());
        assert!(matches!(r, Err(FitError::InsufficientData { .. })));
    }

    #[test]
    fn unused_parameter_is_degenerate() {
        let r = levenberg_marquardt(
            |p, r| {
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri = p[0] - i as f64;
                }
            },
            &[1.0, 1.0],
            5,
            &LmOptions::default(),
        );
        assert!(matches!(r, Err(FitError::Degenerate(_))));
    }

    #[test]
    fn covariance_of_linear_model() {
        // y = a + b x with unit weights: cov = (XᵀX)⁻¹
        let xs = [0.0, 1.0, 2.0, 3.0];
        let sol = levenberg_marquardt(
            |p, r| {
                for i in 0..4 {
                    r[i] = p[0] + p[1] * xs[i] - (1.0 + 2.0 * xs[i]);
                }
            },
            &[0.0, 0.0],
            4,
            &LmOptions::default(),
        )
        .unwrap();
        // XᵀX = [[4, 6], [6, 14]], det 20
        assert!((sol.covariance[(0, 0)] - 14.0 / 20.0).abs() < 1e-6);
        assert!((sol.covariance[(1, 1)] - 4.0 / 20.0).abs() < 1e-6);
    }
}
