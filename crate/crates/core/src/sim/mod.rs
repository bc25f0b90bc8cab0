//! Seeded Monte Carlo of the cyclic detector.

pub mod config;
pub mod engine;
pub mod experiments;
pub mod readout;
pub mod trace;

pub use config::{derive_seed, detuned_pump_offset, ResetMode, SignalSource, SimulationConfig, SpinSource};
pub use engine::{expected_rates, run_cycles, ExpectedRates, WindowRates};
pub use experiments::{
    dark_count_budget, duty_cycle_estimate, efficiency_sweep, measure_efficiency, protocol_configs, run_fluorescence,
    DarkCountBudget, EfficiencyMeasurement, FluorescenceHistogram, LabelledRates,
};
pub use readout::ReadoutModel;
pub use trace::{CauseCounts, Click, ClickCause, ClickTrace};
