//! Digital twin of a transmon-based single microwave photon detector.
//!
//! * [`figures`]: closed-form efficiency, dark counts, sensitivity, bandwidth.
//! * [`tuning`]: SQUID and Purcell tuning, 4WM response, pump and flux calibration.
//! * [`fit`]: least-squares fitters for every calibration curve.
//! * [`sim`]: cycle-level Monte Carlo producing labelled click traces.
//! * [`synth`]: seeded synthetic calibration data for the fitters.
//!
//! Angular frequencies are rad/s throughout; see [`constants`] for conversions.

pub mod constants;
pub mod error;
pub mod figures;
pub mod fit;
pub mod params;
pub mod search;
pub mod sim;
pub mod synth;
pub mod tuning;

pub use error::{Error, Result};
pub use figures::{
    alpha_q_detected, alpha_q_rate, alpha_th_rate, bose_einstein, detection_bandwidth, eta_4wm, eta_omega, eta_q,
    eta_smpd, figure_of_merit, k_q, k_th, sensitivity, temperature_from_occupation, EfficiencyBreakdown, FigureOfMerit,
};
pub use fit::{FitError, FitResult};
pub use params::{CycleTiming, DeviceParams, NoiseEnvironment, TuningState};
pub use sim::{ClickCause, ClickTrace, SignalSource, SimulationConfig};
