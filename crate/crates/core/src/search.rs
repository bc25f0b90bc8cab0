//! Scalar root finding and one-dimensional minimisation.

use crate::error::{Error, Result};

/// Root of `f` on `[lo, hi]` by bisection. `f(lo)` and `f(hi)` must differ in sign.
///
/// Stops when the bracket is narrower than `rel_tol · |mid|`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::invalid("bracket", format!("f({lo}) and f({hi}) do not bracket a root")));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum of a unimodal `f` on `[a, b]` by golden-section search. Returns `(x, f(x))`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (c.abs() + d.abs()).max(f64::MIN_POSITIVE) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // endpoints of the final bracket can beat the midpoint when the optimum sits on a bound
    [(x, fx), (a, f(a)), (b, f(b))]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// `n` points evenly spaced on `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` points evenly spaced in log on `[a, b]`; both must be positive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// Index and value of the smallest finite entry.
pub fn argmin(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_rejects_non_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn golden_on_bound() {
        let (x, _) = golden_section(|x| x, 1.0, 2.0, 1e-12);
        assert!((x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spacing() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
        let l = logspace(1.0, 100.0, 3);
        assert!((l[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn argmin_skips_nan() {
        assert_eq!(argmin(&[3.0, f64::NAN, 1.0, 2.0]), Some((2, 1.0)));
        assert_eq!(argmin(&[]), None);
    }

    proptest! {
        #[test]
        fn golden_finds_parabola_minimum(m in -10.0f64..10.0, w in 0.1f64..5.0) {
            let (x, _) = golden_section(|x| (x - m) * (x - m), m - w, m + 2.0 * w, 1e-12);
            prop_assert!((x - m).abs() < 1e-6);
        }
    }
}
