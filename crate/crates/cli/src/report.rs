//! Target table, verdicts and scenario artifacts.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const TARGETS: &str = include_str!("../data/targets.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        }
    }
}

/// How far `computed` may sit from `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    Abs { value: f64 },
    Rel { value: f64 },
    /// target/f ≤ computed ≤ target·f.
    Factor { value: f64 },
    Range { lo: f64, hi: f64 },
    /// `sigmas` · √(target / duration), for a count rate measured over `duration` seconds.
    Poisson { sigmas: f64, duration: f64 },
    Info,
}

impl Tolerance {
    /// Accepted interval around `target`.
    pub fn band(&self, target: f64) -> (f64, f64) {
        match *self {
            Tolerance::Abs { value } => (target - value, target + value),
            Tolerance::Rel { value } => {
                let d = value * target.abs();
                (target - d, target + d)
            }
            Tolerance::Factor { value } => (target / value, target * value),
            Tolerance::Range { lo, hi } => (lo, hi),
            Tolerance::Poisson { sigmas, duration } => {
                let d = sigmas * (target.max(0.0) / duration).sqrt();
                (target - d, target + d)
            }
            Tolerance::Info => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Pure verdict of `computed` against `target` within `tol`.
pub fn evaluate(target: f64, computed: f64, tol: &Tolerance) -> Verdict {
    if matches!(tol, Tolerance::Info) {
        return Verdict::Info;
    }
    let (lo, hi) = tol.band(target);
    if computed.is_finite() && computed >= lo && computed <= hi {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetEntry {
    id: String,
    scenario: String,
    value: Option<f64>,
    unit: Option<String>,
    abs: Option<f64>,
    rel: Option<f64>,
    factor: Option<f64>,
    range: Option<[f64; 2]>,
    poisson_sigmas: Option<f64>,
    #[serde(default)]
    info: bool,
    source: String,
}

#[derive(Debug, Deserialize)]
struct TargetFile {
    target: Vec<TargetEntry>,
}

/// One row of the target table.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub id: String,
    pub scenario: String,
    /// `None` when the target is the configured truth supplied by the scenario.
    pub value: Option<f64>,
    pub unit: String,
    pub tolerance: TargetTolerance,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetTolerance {
    Fixed(Tolerance),
    /// Poisson band; the duration comes from the run.
    Poisson { sigmas: f64 },
}

fn parse_targets(text: &str) -> Result<Vec<Target>, String> {
    let file: TargetFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for e in file.target {
        let given = [e.abs.is_some(), e.rel.is_some(), e.factor.is_some(), e.range.is_some(), e.poisson_sigmas.is_some(), e.info]
            .iter()
            .filter(|b| **b)
            .count();
        if given != 1 {
            return Err(format!("target `{}` needs exactly one tolerance", e.id));
        }
        let tolerance = if let Some(v) = e.abs {
            TargetTolerance::Fixed(Tolerance::Abs { value: v })
        } else if let Some(v) = e.rel {
            TargetTolerance::Fixed(Tolerance::Rel { value: v })
        } else if let Some(v) = e.factor {
            TargetTolerance::Fixed(Tolerance::Factor { value: v })
        } else if let Some([lo, hi]) = e.range {
            TargetTolerance::Fixed(Tolerance::Range { lo, hi })
        } else if let Some(s) = e.poisson_sigmas {
            TargetTolerance::Poisson { sigmas: s }
        } else {
            TargetTolerance::Fixed(Tolerance::Info)
        };
        if out.iter().any(|t: &Target| t.id == e.id) {
            return Err(format!("duplicate target `{}`", e.id));
        }
        out.push(Target {
            id: e.id,
            scenario: e.scenario,
            value: e.value,
            unit: e.unit.unwrap_or_default(),
            tolerance,
            source: e.source,
        });
    }
    Ok(out)
}

/// The embedded target table.
pub fn targets() -> Vec<Target> {
    parse_targets(TARGETS).expect("embedded target table parses")
}

pub fn target(id: &str) -> Target {
    targets()
        .into_iter()
        .find(|t| t.id == id)
        .unwrap_or_else(|| panic!("no target `{id}` in the table"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub source: String,
    pub unit: String,
    pub target: f64,
    /// Non-finite values are written as `null` and read back as NaN.
    #[serde(deserialize_with = "nullable")]
    pub computed: f64,
    pub tolerance: Tolerance,
    /// Open ends are written as `null`.
    #[serde(deserialize_with = "nullable_band")]
    pub band: (f64, f64),
    pub verdict: Verdict,
}

impl Check {
    /// Check against table entry `id`. `truth` fills targets without a fixed value;
    /// `duration` resolves Poisson bands.
    pub fn new(id: &str, computed: f64, truth: Option<f64>, duration: Option<f64>) -> Self {
        let t = target(id);
        let value = t
            .value
            .or(truth)
            .unwrap_or_else(|| panic!("target `{id}` needs a configured truth"));
        let tolerance = match t.tolerance {
            TargetTolerance::Fixed(tol) => tol,
            TargetTolerance::Poisson { sigmas } => Tolerance::Poisson {
                sigmas,
                duration: duration.unwrap_or_else(|| panic!("target `{id}` needs a run duration")),
            },
        };
        Self {
            id: id.into(),
            source: t.source,
            unit: t.unit,
            target: value,
            computed,
            band: tolerance.band(value),
            verdict: evaluate(value, computed, &tolerance),
            tolerance,
        }
    }
}

fn nullable<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn nullable_band<'de, D: serde::Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
    let (lo, hi) = <(Option<f64>, Option<f64>)>::deserialize(d)?;
    Ok((lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
}

/// Tabular data written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Parses a CSV written by [`Curve::to_csv`].
    pub fn from_csv(name: &str, text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty csv")?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, l) in lines.enumerate() {
            let row: Result<Vec<f64>, _> = l.split(',').map(str::parse::<f64>).collect();
            let row = row.map_err(|e| format!("line {}: {e}", i + 2))?;
            if row.len() != columns.len() {
                return Err(format!("line {}: expected {} cells", i + 2, columns.len()));
            }
            rows.push(row);
        }
        Ok(Self { name: name.into(), columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub info: usize,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

/// Everything a scenario produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub scenario: String,
    pub seed: u64,
    pub curves: Vec<Curve>,
    /// Extra files (name, contents), e.g. raw click traces.
    pub files: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl ScenarioOutput {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Self {
            scenario: scenario.into(),
            seed,
            curves: Vec::new(),
            files: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn check(&mut self, id: &str, computed: f64, truth: Option<f64>, duration: Option<f64>) {
        self.checks.push(Check::new(id, computed, truth, duration));
    }

    pub fn summary(&self) -> Summary {
        let count = |v| self.checks.iter().filter(|c| c.verdict == v).count();
        Summary {
            scenario: self.scenario.clone(),
            seed: self.seed,
            checks: self.checks.clone(),
            passed: count(Verdict::Pass),
            failed: count(Verdict::Fail),
            info: count(Verdict::Info),
        }
    }

    /// Writes one CSV per curve, the extra files and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Summary> {
        std::fs::create_dir_all(dir)?;
        for c in &self.curves {
            std::fs::write(dir.join(format!("{}.csv", c.name)), c.to_csv())?;
        }
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        let summary = self.summary();
        let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
        std::fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(summary)
    }

    /// Console table of the checks.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<32} {:>14} {:>14} {:>30}  verdict", "check", "target", "computed", "accepted");
        for c in &self.checks {
            let band = if c.verdict == Verdict::Info {
                "-".to_string()
            } else {
                format!("[{:.4e}, {:.4e}]", c.band.0, c.band.1)
            };
            let _ = writeln!(
                s,
                "{:<32} {:>14.5e} {:>14.5e} {:>30}  {}",
                c.id,
                c.target,
                c.computed,
                band,
                c.verdict.as_str()
            );
        }
        s
    }
}

/// Recomputes every verdict of a written summary from its numbers alone.
pub fn reevaluate(summary: &Summary) -> Vec<Verdict> {
    summary
        .checks
        .iter()
        .map(|c| evaluate(c.target, c.computed, &c.tolerance))
        .collect()
}
