use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use elastic_phaseless_lab::config::{Scenario, Tier};
use elastic_phaseless_lab::presets;
use elastic_phaseless_lab::runner::{run_scenario, RunError, RunOptions};

/// Phaseless elastic scattering experiments.
#[derive(Parser)]
#[command(name = "eplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a preset by name.
    Run {
        /// Path to a scenario TOML file, or the name of a preset.
        config: String,
        /// Output root; the run goes to <out>/<scenario name>/.
        #[arg(long, env = "EPLAB_OUT", default_value = "eplab-out")]
        out: PathBuf,
        /// Noise seed, replacing the scenario's.
        #[arg(long)]
        seed: Option<u64>,
        /// Single noise level, replacing the scenario's list.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, value_enum, default_value_t = Tier::Ci)]
        tier: Tier,
        /// Worker threads for indicator grids (0: all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// List presets, or print one.
    Presets { name: Option<String> },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
}

fn load(config: &str) -> Result<Scenario, String> {
    let path = PathBuf::from(config);
    if path.exists() {
        return Scenario::load(&path).map_err(|e| format!("{}: {e}", path.display()));
    }
    match presets::get(config) {
        Some(r) => r.map_err(|e| format!("preset {config}: {e}")),
        None => Err(format!("{config}: no such file or preset")),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Presets { name: None } => {
            for (name, text) in presets::PRESETS {
                let description = Scenario::from_toml_str(text).map(|s| s.description).unwrap_or_default();
                println!("{name:<28} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Presets { name: Some(name) } => match presets::text(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown preset {name}");
                ExitCode::from(1)
            }
        },
        Command::Validate { config } => match Scenario::load(&config) {
            Ok(s) => {
                println!("ok: {}", s.name);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::from(1)
            }
        },
        Command::Run { config, out, seed, noise, tier, workers } => {
            let scenario = match load(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            if tier == Tier::Paper && scenario.is_obstacle() {
                eprintln!("warning: paper tier solves at omega = 8 pi with 512 directions; expect a long run");
            }
            let options = RunOptions { out_root: out, seed, noise, tier, workers };
            match run_scenario(&scenario, &options) {
                Ok(report) => {
                    for w in &report.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("{}: {} files in {}", scenario.name, report.files.len(), report.dir.display());
                    if report.degraded {
                        eprintln!("solver degraded beyond tolerance; see manifest.toml");
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e @ RunError::Config(_)) => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
