//! Flux tuning, conversion response and calibration procedures.

pub mod fwm;
pub mod pump;
pub mod purcell;
pub mod ramsey;
pub mod squid;

pub use fwm::{numeric_fwhm, s_4wm, FourWaveMixingSurface};
pub use pump::{calibrate_pump, CooperativityMeasurement, PumpCalibration, PumpCalibrationOptions, PumpStep};
pub use purcell::{kappa_bc_of_detuning, PurcellCouplingModel};
pub use ramsey::{epsilon_sq_for_flux, invert_ramsey, photon_flux_from_ramsey, ramsey_shift};
pub use squid::{
    asymmetry_from_ratio, buffer_frequency, purcell_frequency, ratio_from_asymmetry, SquidModelKind,
    SquidTuningModel,
};
