//! Experiment scenarios. Each one simulates or synthesizes its data set,
//! runs the matching fits and checks the results against the target table.

mod analytic;
mod calibration;
mod dark;
mod efficiency;

use std::fmt;

use crate::config::Config;
use crate::report::ScenarioOutput;

pub use analytic::optimize_spec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    TuningCurves,
    FwmMap,
    DarkVsTemperature,
    DarkVsBandwidth,
    EfficiencySweep,
    ClickTraces,
    Fluorescence,
    SensitivityReport,
    Optimize,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::TuningCurves,
        ScenarioKind::FwmMap,
        ScenarioKind::DarkVsTemperature,
        ScenarioKind::DarkVsBandwidth,
        ScenarioKind::EfficiencySweep,
        ScenarioKind::ClickTraces,
        ScenarioKind::Fluorescence,
        ScenarioKind::SensitivityReport,
        ScenarioKind::Optimize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::TuningCurves => "tuning-curves",
            ScenarioKind::FwmMap => "fwm-map",
            ScenarioKind::DarkVsTemperature => "dark-vs-temperature",
            ScenarioKind::DarkVsBandwidth => "dark-vs-bandwidth",
            ScenarioKind::EfficiencySweep => "efficiency-sweep",
            ScenarioKind::ClickTraces => "click-traces",
            ScenarioKind::Fluorescence => "fluorescence",
            ScenarioKind::SensitivityReport => "sensitivity-report",
            ScenarioKind::Optimize => "optimize",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::TuningCurves => "buffer and Purcell flux tuning, SQUID fits, coupling vs detuning",
            ScenarioKind::FwmMap => "synthetic conversion map and its five-parameter fit",
            ScenarioKind::DarkVsTemperature => "dark-count protocols vs cryostat temperature with thermal fits",
            ScenarioKind::DarkVsBandwidth => "tuned dark rate vs detection bandwidth with a linear fit",
            ScenarioKind::EfficiencySweep => "efficiency vs signal frequency for two buffer linewidths",
            ScenarioKind::ClickTraces => "labelled click traces and the dark-rate table",
            ScenarioKind::Fluorescence => "single-spin fluorescence histogram and decay fit",
            ScenarioKind::SensitivityReport => "analytic efficiency, dark-count budget and sensitivity",
            ScenarioKind::Optimize => "sensitivity optimum over bandwidth and detection window",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{scenario}: {step}: {message}")]
pub struct ScenarioError {
    pub scenario: &'static str,
    pub step: String,
    pub message: String,
}

/// Attaches scenario context to sub-module errors.
pub(crate) trait Context<T> {
    fn ctx(self, kind: ScenarioKind, step: &str) -> Result<T, ScenarioError>;
}

impl<T, E: fmt::Display> Context<T> for Result<T, E> {
    fn ctx(self, kind: ScenarioKind, step: &str) -> Result<T, ScenarioError> {
        self.map_err(|e| ScenarioError {
            scenario: kind.as_str(),
            step: step.into(),
            message: e.to_string(),
        })
    }
}

/// Runs `kind` on `config`. Output depends only on the config and `seed`.
pub fn run(kind: ScenarioKind, config: &Config, seed: u64) -> Result<ScenarioOutput, ScenarioError> {
    let mut out = ScenarioOutput::new(kind.as_str(), seed);
    match kind {
        ScenarioKind::TuningCurves => calibration::tuning_curves(config, seed, &mut out)?,
        ScenarioKind::FwmMap => calibration::fwm_map(config, seed, &mut out)?,
        ScenarioKind::DarkVsTemperature => dark::dark_vs_temperature(config, seed, &mut out)?,
        ScenarioKind::DarkVsBandwidth => dark::dark_vs_bandwidth(config, seed, &mut out)?,
        ScenarioKind::ClickTraces => dark::click_traces(config, seed, &mut out)?,
        ScenarioKind::EfficiencySweep => efficiency::efficiency_sweep(config, seed, &mut out)?,
        ScenarioKind::Fluorescence => efficiency::fluorescence(config, seed, &mut out)?,
        ScenarioKind::SensitivityReport => analytic::sensitivity_report(config, &mut out)?,
        ScenarioKind::Optimize => analytic::optimize(config, &mut out)?,
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(ScenarioKind::from_name(k.as_str()), Some(k));
        }
        assert_eq!(ScenarioKind::from_name("fig5"), None);
    }

    #[test]
    fn every_scenario_has_targets() {
        let t = crate::report::targets();
        for k in ScenarioKind::ALL {
            assert!(t.iter().any(|x| x.scenario == k.as_str()), "{k}");
        }
    }
}
