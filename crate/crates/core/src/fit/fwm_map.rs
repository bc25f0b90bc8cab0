//! Fit of a two-dimensional conversion map (pump frequency × signal frequency).

use serde::{Deserialize, Serialize};

use super::lm::{finish, levenberg_marquardt, param, FitError, FitResult, LmOptions};
use crate::tuning::fwm::{s_4wm_unchecked, FourWaveMixingSurface};

/// Excited-state probability sampled on a rectangular grid.
///
/// `values` is row-major: `values[i * omega.len() + j]` is the sample at
/// (`omega_p[i]`, `omega[j]`). Frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwmMap {
    pub omega_p: Vec<f64>,
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

impl FwmMap {
    /// Samples `amplitude · |S|² + background` on the grid.
    pub fn synthesize(surface: &FourWaveMixingSurface, omega_p: Vec<f64>, omega: Vec<f64>, amplitude: f64, background: f64) -> Self {
        let mut values = Vec::with_capacity(omega_p.len() * omega.len());
        for &wp in &omega_p {
            for &w in &omega {
                values.push(amplitude * surface.response(wp, w) + background);
            }
        }
        Self { omega_p, omega, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.omega.len() + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwmMapFit {
    pub fit: FitResult,
    pub surface: FourWaveMixingSurface,
    /// Detection prefactor scaling |S|² to the measured probability.
    pub amplitude: f64,
    pub background: f64,
}

fn fwhm_of_slice(xs: &[f64], ys: &[f64], peak: usize, base: f64) -> f64 {
    let half = base + 0.5 * (ys[peak] - base);
    let mut lo = peak;
    while lo > 0 && ys[lo] > half {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < ys.len() && ys[hi] > half {
        hi += 1;
    }
    (xs[hi] - xs[lo]).abs().max((xs[1] - xs[0]).abs())
}

fn linear_amplitude(model: &[f64], data: &[f64]) -> (f64, f64, f64) {
    // least squares data ≈ a·model + b
    let n = model.len() as f64;
    let (sx, sy) = (model.iter().sum::<f64>(), data.iter().sum::<f64>());
    let sxx: f64 = model.iter().map(|x| x * x).sum();
    let sxy: f64 = model.iter().zip(data).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return (0.0, sy / n, f64::INFINITY);
    }
    let a = (n * sxy - sx * sy) / det;
    let b = (sy - a * sx) / n;
    let sse = model.iter().zip(data).map(|(x, y)| (a * x + b - y).powi(2)).sum();
    (a, b, sse)
}

/// Fits C, κ_b, κ_w, ω_4WM, ω_b plus a free amplitude and background.
pub fn fit_4wm_map(map: &FwmMap) -> Result<FwmMapFit, FitError> {
    let (np, ns) = (map.omega_p.len(), map.omega.len());
    if np < 5 || ns < 5 || map.values.len() != np * ns {
        return Err(FitError::InvalidInput(format!(
            "map must be at least 5×5 with {}×{} values, got {} values",
            np,
            ns,
            map.values.len()
        )));
    }
    if map.values.iter().any(|v| !v.is_finite()) {
        return Err(FitError::InvalidInput("non-finite map value".into()));
    }
    let vmax = map.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = map.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut sorted = map.values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    // robust noise scale from the lower half (mostly background)
    let mad = {
        let mut d: Vec<f64> = sorted[..sorted.len() / 2].iter().map(|v| (v - median).abs()).collect();
        d.sort_by(f64::total_cmp);
        1.4826 * d[d.len() / 2]
    };
    if !(vmax - vmin > 0.0) {
        return Err(FitError::Degenerate("flat map".into()));
    }

    let imax = (0..map.values.len()).max_by(|&a, &b| map.values[a].total_cmp(&map.values[b])).unwrap();
    let (ip, js) = (imax / ns, imax % ns);
    let wp0 = map.omega_p[ip];
    let wb0 = map.omega[js];
    let row: Vec<f64> = (0..ns).map(|j| map.at(ip, j)).collect();
    let col: Vec<f64> = (0..np).map(|i| map.at(i, js)).collect();
    let kb0 = 0.5 * fwhm_of_slice(&map.omega, &row, js, median);
    let kw0 = 0.5 * fwhm_of_slice(&map.omega_p, &col, ip, median);

    let x: Vec<(f64, f64)> = map
        .omega_p
        .iter()
        .flat_map(|&wp| map.omega.iter().map(move |&w| (wp, w)))
        .collect();
    let scale = vmax - vmin;
    let data: Vec<f64> = map.values.iter().map(|v| v / scale).collect();

    // internal parameters: [C, κ_b/κ_b0, κ_w/κ_w0, (ω4−ω4_0)/κ_w0, (ω_b−ω_b0)/κ_b0, A, B]
    let model = |p: &[f64], wp: f64, w: f64| {
        let kb = p[1].abs() * kb0;
        let kw = p[2].abs() * kw0;
        let w4 = wp0 + p[3] * kw0;
        let wb = wb0 + p[4] * kb0;
        p[5] * s_4wm_unchecked(w - wb, wp - w4, p[0].abs(), kb, kw) + p[6]
    };

    // presearch over C (and the linewidth guesses) with A, B solved linearly
    let mut best: Option<([f64; 7], f64)> = None;
    let mut m = vec![0.0; x.len()];
    for &c in &[0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 3.0, 5.0] {
        for &sb in &[0.7, 1.0, 1.4] {
            for &sw in &[0.5, 0.7, 1.0, 1.4] {
                let trial = [c, sb, sw, 0.0, 0.0, 1.0, 0.0];
                for (k, &(wp, w)) in x.iter().enumerate() {
                    m[k] = model(&trial, wp, w);
                }
                let (a, b, sse) = linear_amplitude(&m, &data);
                if best.as_ref().map_or(true, |(_, s)| sse < *s) {
                    best = Some(([c, sb, sw, 0.0, 0.0, a, b], sse));
                }
            }
        }
    }
    let p0 = best.unwrap().0;

    let n = x.len();
    let sol = levenberg_marquardt(
        |p, r| {
            for k in 0..n {
                r[k] = model(p, x[k].0, x[k].1) - data[k];
            }
        },
        &p0,
        n,
        &LmOptions::default(),
    )?;
    let s2 = sol.reduced_chi2();
    let sig = |i: usize| (sol.covariance[(i, i)] * s2).max(0.0).sqrt();
    let p = &sol.params;
    let c = p[0].abs();
    let amplitude = p[5] * scale;
    let peak = amplitude * 4.0 * c / (1.0 + c).powi(2);
    let noise = (s2.sqrt() * scale).max(mad);
    if !(peak > 5.0 * noise) {
        return Err(FitError::NoSignal(format!("conversion peak {peak:.3e} below 5× noise {noise:.3e}")));
    }
    let surface = FourWaveMixingSurface {
        cooperativity: c,
        kappa_b: p[1].abs() * kb0,
        kappa_w: p[2].abs() * kw0,
        omega_4wm: wp0 + p[3] * kw0,
        omega_b: wb0 + p[4] * kb0,
    };
    let fit = finish(
        &sol,
        vec![
            param("C", c, sig(0)),
            param("kappa_b", surface.kappa_b, sig(1) * kb0),
            param("kappa_w", surface.kappa_w, sig(2) * kw0),
            param("omega_4wm", surface.omega_4wm, sig(3) * kw0),
            param("omega_b", surface.omega_b, sig(4) * kb0),
            param("amplitude", amplitude, sig(5) * scale),
            param("background", p[6] * scale, sig(6) * scale),
        ],
    )?;
    Ok(FwmMapFit {
        fit,
        surface,
        amplitude,
        background: p[6] * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ghz, khz, mhz};
    use crate::search::linspace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn grid(s: &FourWaveMixingSurface) -> (Vec<f64>, Vec<f64>) {
        (
            linspace(s.omega_4wm - 3.0 * s.kappa_w, s.omega_4wm + 3.0 * s.kappa_w, 41),
            linspace(s.omega_b - 4.0 * s.kappa_b, s.omega_b + 4.0 * s.kappa_b, 41),
        )
    }

    fn truth(c: f64) -> FourWaveMixingSurface {
        FourWaveMixingSurface {
            cooperativity: c,
            kappa_b: khz(120.0),
            kappa_w: mhz(1.75),
            omega_4wm: ghz(7.3),
            omega_b: ghz(7.7),
        }
    }

    #[test]
    fn noiseless_recovery() {
        let s = truth(0.99);
        let (wp, w) = grid(&s);
        let map = FwmMap::synthesize(&s, wp, w, 0.6, 0.02);
        let f = fit_4wm_map(&map).unwrap();
        assert!((f.surface.cooperativity - 0.99).abs() < 1e-5);
        assert!((f.surface.kappa_b / s.kappa_b - 1.0).abs() < 1e-5);
        assert!((f.surface.kappa_w / s.kappa_w - 1.0).abs() < 1e-5);
    }

    #[test]
    fn noisy_recovery_and_scale_invariance() {
        let s = truth(0.99);
        let (wp, w) = grid(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nd = Normal::new(0.0, 0.02).unwrap();
        let mut map = FwmMap::synthesize(&s, wp, w, 0.6, 0.02);
        for v in &mut map.values {
            *v += 0.6 * nd.sample(&mut rng);
        }
        let f = fit_4wm_map(&map).unwrap();
        assert!((f.surface.cooperativity - 0.99).abs() < 0.05);
        let mut scaled = map.clone();
        for v in &mut scaled.values {
            *v *= 3.7;
        }
        let g = fit_4wm_map(&scaled).unwrap();
        assert!((g.surface.cooperativity - f.surface.cooperativity).abs() < 1e-6);
        assert!((g.amplitude / f.amplitude - 3.7).abs() < 1e-5);
    }

    #[test]
    fn signal_off_map_fails() {
        let s = truth(0.99);
        let (wp, w) = grid(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nd = Normal::new(0.0, 0.01).unwrap();
        let mut map = FwmMap::synthesize(&s, wp, w, 0.0, 0.05);
        for v in &mut map.values {
            *v += nd.sample(&mut rng);
        }
        match fit_4wm_map(&map) {
            Err(_) => {}
            Ok(f) => assert!(f.surface.cooperativity < 0.05 || f.amplitude.abs() < 0.05),
        }
        let flat = FwmMap::synthesize(&s, grid(&s).0, grid(&s).1, 0.0, 0.05);
        assert!(fit_4wm_map(&flat).is_err());
    }
}
