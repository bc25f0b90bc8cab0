use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{non_negative, Error, Result};

/// Two-Gaussian dispersive readout with a single threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub i_ground: f64,
    pub i_excited: f64,
    pub sigma: f64,
    pub threshold: f64,
    pub t_ro: f64,
}

fn std_normal() -> Normal {
    Normal::standard()
}

impl ReadoutModel {
    /// Places the threshold for the requested ground false-positive
    /// probability, then the excited mean so that P(click | e) = `f_ro`.
    pub fn from_fidelity(f_ro: f64, false_positive: f64, t_ro: f64) -> Result<Self> {
        if !(f_ro > 0.0 && f_ro <= 1.0) {
            return Err(Error::domain("f_ro", f_ro, "must lie in (0, 1]"));
        }
        if !(false_positive >= 0.0 && false_positive < 0.5) {
            return Err(Error::domain("false_positive", false_positive, "must lie in [0, 0.5)"));
        }
        non_negative("t_ro", t_ro)?;
        let n = std_normal();
        let threshold = -n.inverse_cdf(false_positive.max(1e-300));
        let f = f_ro.min(1.0 - 1e-15);
        Ok(Self {
            i_ground: 0.0,
            i_excited: threshold + n.inverse_cdf(f),
            sigma: 1.0,
            threshold,
            t_ro,
        })
    }

    /// P(click | excited).
    pub fn fidelity(&self) -> f64 {
        1.0 - std_normal().cdf((self.threshold - self.i_excited) / self.sigma)
    }

    /// P(click | ground).
    pub fn false_positive(&self) -> f64 {
        1.0 - std_normal().cdf((self.threshold - self.i_ground) / self.sigma)
    }

    pub fn sample<R: Rng + ?Sized>(&self, excited: bool, rng: &mut R) -> f64 {
        let mean = if excited { self.i_excited } else { self.i_ground };
        let z: f64 = rng.sample(StandardNormal);
        mean + self.sigma * z
    }

    pub fn click<R: Rng + ?Sized>(&self, excited: bool, rng: &mut R) -> bool {
        self.sample(excited, rng) > self.threshold
    }
}
