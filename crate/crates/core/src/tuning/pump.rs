//! Iterative pump-amplitude calibration towards C = 1.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{positive, Error, Result};

/// One cooperativity measurement at a given pump amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooperativityMeasurement {
    pub cooperativity: f64,
    /// Relative 1σ uncertainty of the fitted C. Zero for an exact measurement.
    pub rel_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpCalibrationOptions {
    /// Target accuracy on |C − 1|.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Two-sided confidence that |C − 1| is below `tolerance` at the returned ξ.
    pub confidence: f64,
}

impl Default for PumpCalibrationOptions {
    fn default() -> Self {
        Self {
            tolerance: 0.02,
            max_iterations: 10,
            confidence: 0.97,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpStep {
    pub xi: f64,
    pub measured: f64,
    pub rel_sigma: f64,
    /// Amplitude proposed after this measurement.
    pub next_xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpCalibration {
    pub xi_star: f64,
    pub iterations: usize,
    pub log: Vec<PumpStep>,
}

/// Upper 0.1% point of χ² with `dof` degrees of freedom.
fn chi2_limit(dof: f64) -> f64 {
    ChiSquared::new(dof).map_or(f64::INFINITY, |d| d.inverse_cdf(0.999))
}

/// Drives the pump towards C = 1 assuming C = k ξ².
///
/// Every measurement gives an estimate of ln k; the estimates are pooled by
/// inverse variance and the next amplitude is ξ = k̂^(−1/2). For the first
/// step this is the plain update ξ ← ξ/√C. Calibration stops once the pooled
/// estimate pins C to `tolerance` at the requested confidence and the latest
/// reading agrees with C = 1 within its own error bar. A plateauing oracle
/// produces mutually inconsistent k estimates and never satisfies the
/// stopping rule.
pub fn calibrate_pump<F>(mut oracle: F, xi_initial: f64, opts: &PumpCalibrationOptions) -> Result<PumpCalibration>
where
    F: FnMut(f64) -> Result<CooperativityMeasurement>,
{
    positive("xi_initial", xi_initial)?;
    positive("tolerance", opts.tolerance)?;
    if !(opts.confidence > 0.0 && opts.confidence < 1.0) {
        return Err(Error::domain("confidence", opts.confidence, "must lie in (0, 1)"));
    }
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * opts.confidence);
    let tol_log = (1.0 + opts.tolerance).ln();

    let mut xi = xi_initial;
    let mut log = Vec::new();
    let mut sum_w = 0.0;
    let mut sum_wl = 0.0;
    let mut exact: Option<f64> = None;
    let mut samples: Vec<(f64, f64)> = Vec::new();

    for it in 1..=opts.max_iterations {
        let m = oracle(xi)?;
        if !(m.cooperativity > 0.0) || !m.cooperativity.is_finite() {
            return Err(Error::domain("cooperativity", m.cooperativity, "oracle returned no conversion"));
        }
        let ln_k = (m.cooperativity / (xi * xi)).ln();
        samples.push((ln_k, m.rel_sigma));
        let ln_k_hat = if m.rel_sigma <= 0.0 {
            exact = Some(ln_k);
            ln_k
        } else if let Some(e) = exact {
            e
        } else {
            let w = 1.0 / (m.rel_sigma * m.rel_sigma);
            sum_w += w;
            sum_wl += w * ln_k;
            sum_wl / sum_w
        };
        let next = (-0.5 * ln_k_hat).exp();
        log.push(PumpStep {
            xi,
            measured: m.cooperativity,
            rel_sigma: m.rel_sigma,
            next_xi: next,
        });

        let sem = if exact.is_some() { 0.0 } else { sum_w.powf(-0.5) };
        let chi2: f64 = samples
            .iter()
            .filter(|(_, s)| *s > 0.0)
            .map(|(l, s)| ((l - ln_k_hat) / s).powi(2))
            .sum();
        let dof = samples.len().saturating_sub(1).max(1) as f64;
        let consistent = samples.len() < 2 || chi2 <= chi2_limit(dof);
        let latest_ok = exact.is_some() || m.cooperativity.ln().abs() <= tol_log + z * m.rel_sigma;
        xi = next;
        if z * sem <= tol_log && consistent && latest_ok {
            return Ok(PumpCalibration {
                xi_star: xi,
                iterations: it,
                log,
            });
        }
    }
    let last = log.last().copied();
    Err(Error::CalibrationNotConverged {
        iterations: opts.max_iterations,
        last_cooperativity: last.map_or(f64::NAN, |s| s.measured),
        last_xi: xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal as RNormal};

    #[test]
    fn exact_oracle_converges_in_one_step() {
        // C = 4 at ξ = 2
        let k = 1.0;
        let oracle = |xi: f64| {
            Ok(CooperativityMeasurement {
                cooperativity: k * xi * xi,
                rel_sigma: 0.0,
            })
        };
        let cal = calibrate_pump(oracle, 2.0, &PumpCalibrationOptions::default()).unwrap();
        assert_eq!(cal.iterations, 1);
        assert_eq!(cal.xi_star * cal.xi_star * k, 1.0);
        assert_eq!(cal.log[0].measured, 4.0);
    }

    #[test]
    fn contraction_from_any_start() {
        for c0 in [0.01, 0.5, 3.0, 100.0] {
            let k = c0;
            let cal = calibrate_pump(
                |xi| {
                    Ok(CooperativityMeasurement {
                        cooperativity: k * xi * xi,
                        rel_sigma: 0.0,
                    })
                },
                1.0,
                &PumpCalibrationOptions::default(),
            )
            .unwrap();
            assert!((k * cal.xi_star * cal.xi_star - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_oracle_fails() {
        let r = calibrate_pump(
            |_| {
                Ok(CooperativityMeasurement {
                    cooperativity: 0.0,
                    rel_sigma: 0.05,
                })
            },
            1.0,
            &PumpCalibrationOptions::default(),
        );
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn saturating_oracle_reports_non_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = RNormal::new(0.0, 0.05).unwrap();
        let r = calibrate_pump(
            |xi| {
                Ok(CooperativityMeasurement {
                    cooperativity: (0.5 * xi * xi).min(0.5) * (1.0 + noise.sample(&mut rng)),
                    rel_sigma: 0.05,
                })
            },
            0.5,
            &PumpCalibrationOptions {
                tolerance: 0.05,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::CalibrationNotConverged { .. })), "{r:?}");
    }

    #[test]
    fn rejects_bad_options() {
        let o = |_: f64| {
            Ok(CooperativityMeasurement {
                cooperativity: 1.0,
                rel_sigma: 0.0,
            })
        };
        assert!(calibrate_pump(o, 0.0, &PumpCalibrationOptions::default()).is_err());
        let bad = PumpCalibrationOptions {
            confidence: 1.0,
            ..Default::default()
        };
        assert!(calibrate_pump(o, 1.0, &bad).is_err());
    }
}
