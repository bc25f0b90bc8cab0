use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClickCause {
    Signal,
    Thermal,
    QubitThermal,
    PumpHeating,
    ReadoutError,
}

impl ClickCause {
    pub const ALL: [ClickCause; 5] = [
        ClickCause::Signal,
        ClickCause::Thermal,
        ClickCause::QubitThermal,
        ClickCause::PumpHeating,
        ClickCause::ReadoutError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClickCause::Signal => "signal",
            ClickCause::Thermal => "thermal",
            ClickCause::QubitThermal => "qubit_thermal",
            ClickCause::PumpHeating => "pump_heating",
            ClickCause::ReadoutError => "readout_error",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ClickCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClickCause {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClickCause::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown click cause `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Click {
    pub cycle_index: u64,
    /// End of the readout that registered the click, seconds since start.
    pub wall_time: f64,
    pub cause: ClickCause,
    /// For pulsed sources: time from the last excitation pulse to the end of the detection window.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub since_pulse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickTrace {
    pub clicks: Vec<Click>,
    pub total_cycles: u64,
    pub total_wall_time: f64,
    pub mean_cycle_duration: f64,
    /// Detection window length used for the run.
    pub t_d: f64,
    pub reset_rounds: u64,
}

/// Per-cause click counts. Merging is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauseCounts([u64; 5]);

impl CauseCounts {
    pub fn add(&mut self, cause: ClickCause) {
        self.0[cause.index()] += 1;
    }

    pub fn get(&self, cause: ClickCause) -> u64 {
        self.0[cause.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn merge(mut self, other: CauseCounts) -> CauseCounts {
        for i in 0..5 {
            self.0[i] += other.0[i];
        }
        self
    }
}

impl ClickTrace {
    pub fn counts(&self) -> CauseCounts {
        let mut c = CauseCounts::default();
        for k in &self.clicks {
            c.add(k.cause);
        }
        c
    }

    /// Clicks per second of wall time.
    pub fn rate(&self) -> f64 {
        if self.total_wall_time > 0.0 {
            self.clicks.len() as f64 / self.total_wall_time
        } else {
            0.0
        }
    }

    pub fn cause_rate(&self, cause: ClickCause) -> f64 {
        if self.total_wall_time > 0.0 {
            self.counts().get(cause) as f64 / self.total_wall_time
        } else {
            0.0
        }
    }

    /// Writes `cycle_index,wall_time_s,cause` rows under a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "cycle_index,wall_time_s,cause")?;
        for c in &self.clicks {
            writeln!(w, "{},{:.9e},{}", c.cycle_index, c.wall_time, c.cause)?;
        }
        Ok(())
    }

    /// Reads click rows written by [`Self::write_csv`]. Totals are not stored in the CSV.
    pub fn read_csv_clicks<R: BufRead>(r: R) -> io::Result<Vec<Click>> {
        let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        let mut out = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != "cycle_index,wall_time_s,cause" {
                    return Err(bad(format!("unexpected header `{line}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let (Some(a), Some(b), Some(c), None) = (it.next(), it.next(), it.next(), it.next()) else {
                return Err(bad(format!("line {}: expected 3 fields", i + 1)));
            };
            out.push(Click {
                cycle_index: a.trim().parse().map_err(|e| bad(format!("line {}: {e}", i + 1)))?,
                wall_time: b.trim().parse().map_err(|e| bad(format!("line {}: {e}", i + 1)))?,
                cause: c.trim().parse().map_err(|e: String| bad(format!("line {}: {e}", i + 1)))?,
                since_pulse: None,
            });
        }
        Ok(out)
    }
}
