//! Buffer coupling rate set by detuning from the Purcell filter.

use serde::{Deserialize, Serialize};

use crate::constants::mhz;
use crate::error::{positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellCouplingModel {
    pub g_pb: f64,
    pub kappa_pb: f64,
    pub kappa_b_i: f64,
}

impl PurcellCouplingModel {
    /// Model whose on-resonance coupling equals `kappa_max`.
    pub fn from_max(kappa_max: f64, kappa_pb: f64, kappa_b_i: f64) -> Result<Self> {
        positive("kappa_max", kappa_max)?;
        positive("kappa_pb", kappa_pb)?;
        Ok(Self {
            g_pb: (kappa_max * kappa_pb / 4.0).sqrt(),
            kappa_pb,
            kappa_b_i,
        })
    }

    /// 3 MHz maximum coupling through a 20 MHz-wide filter.
    pub fn reference() -> Self {
        Self::from_max(mhz(3.0), mhz(20.0), 2.2e5).expect("valid constants")
    }

    pub fn kappa_max(&self) -> f64 {
        4.0 * self.g_pb * self.g_pb / self.kappa_pb
    }

    /// Detuning |Δ| at which the coupling drops to `kappa_bc`.
    pub fn detuning_for(&self, kappa_bc: f64) -> Result<f64> {
        positive("kappa_bc", kappa_bc)?;
        let d2 = self.kappa_pb * self.g_pb * self.g_pb / kappa_bc - 0.25 * self.kappa_pb * self.kappa_pb;
        Ok(d2.max(0.0).sqrt())
    }
}

/// κ_b,c(Δ) = κ_pb g² / (Δ² + (κ_pb/2)²), Δ = ω_b − ω_pb.
pub fn kappa_bc_of_detuning(delta: f64, model: &PurcellCouplingModel) -> f64 {
    let h = 0.5 * model.kappa_pb;
    model.kappa_pb * model.g_pb * model.g_pb / (delta * delta + h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{khz, to_hz};

    #[test]
    fn maximum_on_resonance() {
        let m = PurcellCouplingModel::reference();
        assert!((kappa_bc_of_detuning(0.0, &m) - 4.0 * m.g_pb * m.g_pb / m.kappa_pb).abs() < 1e-6);
        assert!((to_hz(kappa_bc_of_detuning(0.0, &m)) - 3e6).abs() < 1.0);
        assert!((to_hz(m.g_pb) / 1e6 - 3.873).abs() < 1e-3);
    }

    #[test]
    fn symmetric_and_positive() {
        let m = PurcellCouplingModel::reference();
        for i in 0..50 {
            let d = mhz(i as f64 * 10.0);
            let k = kappa_bc_of_detuning(d, &m);
            assert!(k > 0.0);
            assert_eq!(k, kappa_bc_of_detuning(-d, &m));
        }
    }

    #[test]
    fn far_detuned_reaches_ten_khz() {
        let m = PurcellCouplingModel::reference();
        let d = m.detuning_for(khz(10.0)).unwrap();
        assert!((to_hz(d) / 1e6 - 173.0).abs() < 1.0);
        assert!((kappa_bc_of_detuning(d, &m) / khz(10.0) - 1.0).abs() < 1e-9);
    }
}
