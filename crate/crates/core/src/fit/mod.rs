//! Nonlinear and linear least-squares fitters.

pub mod exponential;
pub mod fwm_map;
pub mod lm;
pub mod lorentzian;
pub mod squid;
pub mod thermal;

pub use exponential::{fit_exponential_decay, ExponentialFit};
pub use fwm_map::{fit_4wm_map, FwmMap, FwmMapFit};
pub use lm::{levenberg_marquardt, FitError, FitParameter, FitResult, LmOptions, LmSolution};
pub use lorentzian::{fit_lorentzian, lorentzian, reflection_power, LorentzianFit};
pub use squid::{fit_purcell_curve, fit_sinusoid, fit_squid_exact, SinusoidFit};
pub use thermal::{fit_linear, fit_thermal_model, RatePoint, ThermalBranch, ThermalFit};
