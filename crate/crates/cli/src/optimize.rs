//! Sensitivity optimisation over detection bandwidth and window length.

use serde::Serialize;
use smpd_core::figures::{alpha_q_detected, eta_4wm, eta_q, kappa_b_for_bandwidth};
use smpd_core::search::{argmin, golden_section, linspace, logspace};
use smpd_core::{sensitivity, CycleTiming, DeviceParams, NoiseEnvironment};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OptimizeError {
    #[error("degenerate bounds for {name}: [{lo}, {hi}]")]
    DegenerateBounds { name: &'static str, lo: f64, hi: f64 },
    #[error("invalid {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("no feasible operating point inside the bounds")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeSpec {
    pub device: DeviceParams,
    pub timing: CycleTiming,
    pub noise: NoiseEnvironment,
    pub cooperativity: f64,
    pub kappa_d_bounds: (f64, f64),
    pub t_d_bounds: (f64, f64),
    /// Lorentzian FWHM of the source line, rad/s. Zero for a monochromatic source.
    pub source_linewidth: f64,
    /// Fixed error rate; `None` derives α_q + α_p from the noise model at each T_d.
    pub alpha_err: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityPoint {
    pub kappa_d: f64,
    pub t_d: f64,
    /// Efficiency at the buffer frequency, internal losses included.
    pub eta_peak: f64,
    /// Efficiency averaged over the source line.
    pub eta_source: f64,
    pub alpha_err: f64,
    pub alpha_th: f64,
    pub sensitivity: f64,
}

impl OptimizeSpec {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        for (name, (lo, hi)) in [("kappa_d", self.kappa_d_bounds), ("t_d", self.t_d_bounds)] {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(OptimizeError::DegenerateBounds { name, lo, hi });
            }
        }
        if !(self.source_linewidth >= 0.0 && self.source_linewidth.is_finite()) {
            return Err(OptimizeError::Invalid {
                name: "source_linewidth",
                reason: format!("must be finite and non-negative, got {}", self.source_linewidth),
            });
        }
        if let Some(a) = self.alpha_err {
            if !(a >= 0.0) {
                return Err(OptimizeError::Invalid { name: "alpha_err", reason: format!("negative: {a}") });
            }
        }
        self.device.validate().map_err(|e| OptimizeError::Invalid { name: "device", reason: e.to_string() })
    }

    /// Analytic figures at (κ_d, T_d). Infeasible points have infinite sensitivity.
    pub fn evaluate(&self, kappa_d: f64, t_d: f64) -> SensitivityPoint {
        let d = &self.device;
        let timing = CycleTiming { t_d, ..self.timing };
        let infeasible = SensitivityPoint {
            kappa_d,
            t_d,
            eta_peak: 0.0,
            eta_source: 0.0,
            alpha_err: f64::NAN,
            alpha_th: f64::NAN,
            sensitivity: f64::INFINITY,
        };
        let Ok(kappa_b) = kappa_b_for_bandwidth(kappa_d, d.kappa_w) else {
            return infeasible;
        };
        let kappa_bc = kappa_b - d.kappa_b_i;
        if !(kappa_bc > 0.0) {
            return infeasible;
        }
        let (Ok(e4), Ok(eq)) = (eta_4wm(self.cooperativity), eta_q(t_d, d.t1)) else {
            return infeasible;
        };
        let eta_peak = e4 * kappa_bc / kappa_b * eq * d.f_ro * timing.duty_cycle();
        let eta_source = eta_peak * kappa_d / (kappa_d + self.source_linewidth);
        let alpha_err = match self.alpha_err {
            Some(a) => a,
            None => {
                alpha_q_detected(self.noise.p_th_q(d.omega_q), &timing, d.t1, d.f_ro).unwrap_or(f64::NAN)
                    + self.noise.alpha_p
            }
        };
        let alpha_th = self.noise.n_th_b(d.omega_b) * kappa_d * eta_peak / 4.0;
        let s = sensitivity(eta_source, alpha_err + alpha_th, d.omega_b).unwrap_or(f64::INFINITY);
        SensitivityPoint {
            kappa_d,
            t_d,
            eta_peak,
            eta_source,
            alpha_err,
            alpha_th,
            sensitivity: s,
        }
    }

    fn s(&self, ln_kd: f64, t_d: f64) -> f64 {
        self.evaluate(ln_kd.exp(), t_d).sensitivity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub best: SensitivityPoint,
    /// Best T_d and sensitivity at each κ_d of a log grid.
    pub tradeoff: Vec<SensitivityPoint>,
}

const COARSE_KD: usize = 41;
const COARSE_TD: usize = 31;
const REFINE_ROUNDS: usize = 6;
const TRADEOFF_POINTS: usize = 60;

/// Coarse grid over (ln κ_d, T_d), then alternating golden-section refinement
/// inside the neighbouring cells.
pub fn optimize_sensitivity(spec: &OptimizeSpec) -> Result<OptimizeResult, OptimizeError> {
    spec.validate()?;
    let (k_lo, k_hi) = (spec.kappa_d_bounds.0.ln(), spec.kappa_d_bounds.1.ln());
    let (t_lo, t_hi) = spec.t_d_bounds;
    let ks = linspace(k_lo, k_hi, COARSE_KD);
    let ts = linspace(t_lo, t_hi, COARSE_TD);
    let grid: Vec<f64> = ks.iter().flat_map(|&k| ts.iter().map(move |&t| spec.s(k, t))).collect();
    let (imin, _) = argmin(&grid).ok_or(OptimizeError::Infeasible)?;
    let (ik, it) = (imin / COARSE_TD, imin % COARSE_TD);
    let (dk, dt) = (ks[1] - ks[0], ts[1] - ts[0]);
    let k_box = ((ks[ik] - dk).max(k_lo), (ks[ik] + dk).min(k_hi));
    let t_box = ((ts[it] - dt).max(t_lo), (ts[it] + dt).min(t_hi));

    let (mut k, mut t, mut best) = (ks[ik], ts[it], grid[imin]);
    for _ in 0..REFINE_ROUNDS {
        let (k_new, s_k) = golden_section(|x| spec.s(x, t), k_box.0, k_box.1, 1e-10);
        if s_k <= best {
            k = k_new;
            best = s_k;
        }
        let (t_new, s_t) = golden_section(|y| spec.s(k, y), t_box.0, t_box.1, 1e-10);
        if s_t <= best {
            t = t_new;
            best = s_t;
        }
    }

    let tradeoff = logspace(spec.kappa_d_bounds.0, spec.kappa_d_bounds.1, TRADEOFF_POINTS)
        .into_iter()
        .map(|kd| {
            let (t_best, _) = golden_section(|y| spec.evaluate(kd, y).sensitivity, t_lo, t_hi, 1e-8);
            spec.evaluate(kd, t_best)
        })
        .collect();
    Ok(OptimizeResult {
        best: spec.evaluate(k.exp(), t),
        tradeoff,
    })
}

/// Exhaustive `n × n` grid, log-spaced in κ_d and linear in T_d. Returns the
/// best point and the grid steps (Δ ln κ_d, ΔT_d).
pub fn brute_force(spec: &OptimizeSpec, n: usize) -> Result<(SensitivityPoint, (f64, f64)), OptimizeError> {
    spec.validate()?;
    if n < 2 {
        return Err(OptimizeError::Invalid { name: "n", reason: "at least 2 grid points".into() });
    }
    let ks = logspace(spec.kappa_d_bounds.0, spec.kappa_d_bounds.1, n);
    let ts = linspace(spec.t_d_bounds.0, spec.t_d_bounds.1, n);
    let mut best: Option<SensitivityPoint> = None;
    for &k in &ks {
        for &t in &ts {
            let p = spec.evaluate(k, t);
            if p.sensitivity.is_finite() && best.map_or(true, |b| p.sensitivity < b.sensitivity) {
                best = Some(p);
            }
        }
    }
    let steps = ((ks[1] / ks[0]).ln(), ts[1] - ts[0]);
    best.map(|b| (b, steps)).ok_or(OptimizeError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use smpd_core::constants::{khz, mhz};

    pub(crate) fn spec() -> OptimizeSpec {
        OptimizeSpec {
            device: DeviceParams::default(),
            timing: CycleTiming::default(),
            noise: NoiseEnvironment::default(),
            cooperativity: 1.0,
            kappa_d_bounds: (khz(50.0), mhz(2.0)),
            t_d_bounds: (5e-6, 60e-6),
            source_linewidth: 0.0,
            alpha_err: None,
        }
    }

    #[test]
    fn degenerate_bounds_rejected() {
        let mut s = spec();
        s.kappa_d_bounds = (khz(100.0), khz(100.0));
        assert!(matches!(optimize_sensitivity(&s), Err(OptimizeError::DegenerateBounds { name: "kappa_d", .. })));
        let mut s = spec();
        s.t_d_bounds = (10e-6, 5e-6);
        assert!(matches!(optimize_sensitivity(&s), Err(OptimizeError::DegenerateBounds { name: "t_d", .. })));
        let mut s = spec();
        s.source_linewidth = -1.0;
        assert!(optimize_sensitivity(&s).is_err());
    }

    #[test]
    fn below_internal_loss_is_infeasible() {
        let p = spec().evaluate(khz(10.0), 15e-6);
        assert!(p.sensitivity.is_infinite());
    }

    #[test]
    fn matches_closed_form_at_operating_point() {
        let s = spec();
        let kd = smpd_core::detection_bandwidth(s.device.kappa_b(), s.device.kappa_w).unwrap();
        let p = s.evaluate(kd, 15e-6);
        let lossless = 0.9001171806415166 * 0.87 * 15.0 / 15.8;
        assert!((p.eta_peak / lossless - s.device.kappa_b_c / s.device.kappa_b()).abs() < 1e-6);
    }

    #[test]
    fn refinement_beats_coarse_grid() {
        let s = spec();
        let r = optimize_sensitivity(&s).unwrap();
        let (b, _) = brute_force(&s, 41).unwrap();
        assert!(r.best.sensitivity <= b.sensitivity * (1.0 + 1e-12));
        assert_eq!(r.tradeoff.len(), TRADEOFF_POINTS);
    }
}
