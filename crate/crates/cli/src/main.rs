use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use smpd_cli::config::{known_keys, load_layered};
use smpd_cli::scenario::{run, ScenarioKind};

#[derive(Parser)]
#[command(name = "smpd", version, about = "Single microwave photon detector model: scenarios and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (or `all`) and write its CSV curves and summary.json.
    Run {
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; `all` writes one subdirectory per scenario.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Parameter override, e.g. `--set t1_us=60`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the available scenarios.
    ListScenarios,
    /// Check a parameter file and print the resolved configuration.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Also list every accepted key.
        #[arg(long)]
        keys: bool,
    },
}

fn run_scenarios(name: &str, config: Option<&Path>, seed: u64, out: &Path, overrides: &[String]) -> anyhow::Result<bool> {
    let cfg = load_layered(config, overrides)?;
    let kinds: Vec<ScenarioKind> = if name == "all" {
        ScenarioKind::ALL.to_vec()
    } else {
        let k = ScenarioKind::from_name(name)
            .with_context(|| format!("unknown scenario `{name}`; see `smpd list-scenarios`"))?;
        vec![k]
    };
    let mut all_pass = true;
    for k in kinds {
        let dir = if name == "all" { out.join(k.as_str()) } else { out.to_path_buf() };
        let output = run(k, &cfg, seed)?;
        let summary = output
            .write(&dir)
            .with_context(|| format!("writing {} output to {}", k, dir.display()))?;
        println!("== {k} (seed {seed}) -> {}", dir.display());
        print!("{}", output.table());
        println!("{} passed, {} failed, {} info\n", summary.passed, summary.failed, summary.info);
        all_pass &= summary.all_pass();
    }
    Ok(all_pass)
}

fn validate(config: Option<&Path>, overrides: &[String], keys: bool) -> anyhow::Result<()> {
    let cfg = load_layered(config, overrides)?;
    println!("{}", serde_json::to_string_pretty(&cfg)?);
    if keys {
        for (k, unit) in known_keys() {
            println!("{k:<32} {unit}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, config, seed, out, overrides } => {
            run_scenarios(&scenario, config.as_deref(), seed, &out, &overrides)
        }
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<22} {}", k.as_str(), k.description());
            }
            Ok(true)
        }
        Command::Validate { config, overrides, keys } => validate(config.as_deref(), &overrides, keys).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
