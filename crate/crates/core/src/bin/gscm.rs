//! Command-line front end for the drift experiment.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use gscm::experiment::{
    chordal_threshold_distances, cmd_threshold_distances, format_g12, run_sweep, seed_means,
    write_csv, ExperimentConfig,
};
use gscm::validation::sos_selftest;

#[derive(Parser)]
#[command(
    name = "gscm",
    version,
    about = "Spatially consistent GSCM channel simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the two-user drift sweep and write the CSV.
    Run {
        /// Config file; omitted keys take their defaults.
        config: Option<PathBuf>,
        /// Output CSV, overrides `output_path`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seeds, e.g. `1,2,7` or `1..20`; overrides `seeds`.
        #[arg(long)]
        seed_list: Option<String>,
    },
    /// Parse and check a config file, then print it with defaults filled in.
    ValidateConfig { config: PathBuf },
    /// Check the sum-of-sinusoids generator against its target statistics.
    SosSelftest {
        #[arg(long, default_value_t = gscm::sosfield::DEFAULT_SINUSOIDS)]
        sinusoids: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn load(config: Option<&PathBuf>) -> Result<ExperimentConfig, Failure> {
    match config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| Failure::Config(e.to_string())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            out,
            seed_list,
        } => {
            let mut cfg = load(config.as_ref())?;
            if let Some(out) = out {
                cfg.output_path = out;
            }
            if let Some(list) = seed_list {
                cfg.seeds = parse_seed_list(&list).map_err(Failure::Config)?;
            }
            cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;

            let started = Instant::now();
            let records = run_sweep(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
            write_csv(&records, &cfg.output_path).map_err(|e| Failure::Runtime(e.to_string()))?;
            eprintln!(
                "{} records written to {} in {:.1} s",
                records.len(),
                cfg.output_path.display(),
                started.elapsed().as_secs_f64()
            );

            let means = seed_means(&records);
            for (d_lambda, reach) in cmd_threshold_distances(&means, cfg.epsilon_cmd) {
                eprintln!(
                    "d_lambda = {d_lambda} m: mean CMD >= {} up to {}",
                    cfg.epsilon_cmd,
                    reach.map_or("no separation".into(), |s| format!("{} m", format_g12(s)))
                );
            }
            if let Some(eps) = cfg.epsilon_chordal {
                for (d_lambda, reach) in chordal_threshold_distances(&means, eps) {
                    eprintln!(
                        "d_lambda = {d_lambda} m: mean chordal distance <= {eps} up to {}",
                        reach.map_or("no separation".into(), |s| format!("{} m", format_g12(s)))
                    );
                }
            }
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let cfg = load(Some(&config))?;
            cfg.scenario().map_err(|e| Failure::Config(e.to_string()))?;
            print!("{}", cfg.to_text());
            Ok(())
        }
        Command::SosSelftest { sinusoids, seed } => {
            if sinusoids == 0 {
                return Err(Failure::Config("--sinusoids must be at least 1".into()));
            }
            let checks =
                sos_selftest(sinusoids, seed).map_err(|e| Failure::Runtime(e.to_string()))?;
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Failure::Runtime("self-test failed".into()))
            }
        }
    }
}

fn parse_seed_list(text: &str) -> Result<Vec<u64>, String> {
    let cfg = ExperimentConfig::parse(&format!("seeds = {text}\n"), None)
        .map_err(|e| format!("--seed-list: {e}"))?;
    Ok(cfg.seeds)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
