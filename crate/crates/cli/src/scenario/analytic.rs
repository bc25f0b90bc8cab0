use smpd_core::constants::to_hz;
use smpd_core::figures::{effective_kappa_d, eta_omega};
use smpd_core::search::linspace;
use smpd_core::{figure_of_merit, k_q, sensitivity};

use super::{Context, ScenarioError, ScenarioKind};
use crate::config::Config;
use crate::optimize::{brute_force, optimize_sensitivity, OptimizeSpec};
use crate::report::{Curve, ScenarioOutput};

const KIND_S: ScenarioKind = ScenarioKind::SensitivityReport;
const KIND_O: ScenarioKind = ScenarioKind::Optimize;

/// Exhaustive grid side used as the optimizer's oracle.
pub const ORACLE_GRID: usize = 100;

pub(super) fn sensitivity_report(config: &Config, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let sim = &config.sim;
    let d = &sim.device;
    let fom = figure_of_merit(d, &sim.tuning, &sim.timing, &sim.noise).ctx(KIND_S, "figure of merit")?;
    let kq = k_q(&sim.timing, d.t1).ctx(KIND_S, "K_q")?;
    let s_measured = sensitivity(config.scenario.eta_measured, fom.alpha_total, d.omega_b).ctx(KIND_S, "sensitivity")?;

    out.check("eta_smpd_predicted", fom.eta_smpd, None, None);
    out.check("sensitivity_measured_point", s_measured, None, None);
    out.check("sensitivity_bracket", s_measured, None, None);
    out.check("sensitivity_model", fom.sensitivity, None, None);
    out.check("alpha_q_predicted", fom.alpha_q, None, None);
    out.check("alpha_p_predicted", fom.alpha_p, None, None);
    out.check("alpha_th_predicted", fom.alpha_th, None, None);
    out.check("k_q_predicted", kq, None, None);

    let mut spec = Curve::new("efficiency_spectrum", &["frequency_hz", "eta_omega", "eta_smpd"]);
    for w in linspace(d.omega_b - 3.0 * fom.kappa_d, d.omega_b + 3.0 * fom.kappa_d, 121) {
        let e = eta_omega(w, d.omega_b, fom.kappa_d).ctx(KIND_S, "spectrum")?;
        spec.push(vec![to_hz(w), e, e * fom.eta_smpd]);
    }
    out.curves.push(spec);
    let json = serde_json::to_string_pretty(&fom).ctx(KIND_S, "serialize")?;
    out.files.push(("figure_of_merit.json".into(), json + "\n"));
    Ok(())
}

/// Optimizer inputs taken from the configuration.
pub fn optimize_spec(config: &Config) -> OptimizeSpec {
    let sim = &config.sim;
    OptimizeSpec {
        device: sim.device,
        timing: sim.timing,
        noise: sim.noise,
        cooperativity: sim.tuning.cooperativity,
        kappa_d_bounds: config.scenario.opt_kappa_d,
        t_d_bounds: config.scenario.opt_t_d,
        source_linewidth: config.scenario.source_linewidth,
        alpha_err: config.scenario.opt_alpha_err,
    }
}

pub(super) fn optimize(config: &Config, out: &mut ScenarioOutput) -> Result<(), ScenarioError> {
    let spec = optimize_spec(config);
    let r = optimize_sensitivity(&spec).ctx(KIND_O, "optimize")?;
    let (oracle, (dk, dt)) = brute_force(&spec, ORACLE_GRID).ctx(KIND_O, "oracle grid")?;
    let op = spec.evaluate(effective_kappa_d(&spec.device, &config.sim.tuning), spec.timing.t_d);

    let cells = ((r.best.kappa_d / oracle.kappa_d).ln().abs() / dk).max((r.best.t_d - oracle.t_d).abs() / dt);
    out.check("optimize_gain", r.best.sensitivity / op.sensitivity, None, None);
    out.check("optimize_oracle_cells", cells, None, None);
    out.check("optimize_kappa_d", to_hz(r.best.kappa_d), Some(to_hz(op.kappa_d)), None);

    let mut c = Curve::new(
        "tradeoff",
        &["kappa_d_hz", "t_d_s", "eta_peak", "eta_source", "alpha_err", "alpha_th", "sensitivity"],
    );
    for p in &r.tradeoff {
        c.push(vec![
            to_hz(p.kappa_d),
            p.t_d,
            p.eta_peak,
            p.eta_source,
            p.alpha_err,
            p.alpha_th,
            p.sensitivity,
        ]);
    }
    out.curves.push(c);
    let doc = serde_json::json!({
        "optimum": r.best,
        "oracle": oracle,
        "operating_point": op,
        "oracle_steps": { "ln_kappa_d": dk, "t_d_s": dt },
    });
    let json = serde_json::to_string_pretty(&doc).ctx(KIND_O, "serialize")?;
    out.files.push(("optimum.json".into(), json + "\n"));
    Ok(())
}
