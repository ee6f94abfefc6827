//! `landscape`: runs one experiment from a TOML config and writes its data,
//! summary and manifest to the output directory.
//!
//! Exit codes: 0 pass, 1 i/o error, 2 invalid configuration, 3 solver
//! failure, 4 a predicate failed, 5 inconclusive.

mod config;
mod error;
mod experiments;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;

use config::{Experiment, ExperimentConfig};
use error::CliError;
use output::RunTiming;

#[derive(Debug, Parser)]
#[command(name = "landscape", version, about = "Monte Carlo experiments on the random landscape function")]
struct Cli {
    /// Experiment to run; must match `experiment` in the config.
    #[arg(value_enum)]
    experiment: Experiment,

    /// TOML experiment config (optional for `selftest`).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads, overriding the config.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,

    /// Master seed, overriding the config.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// Output directory, overriding the config.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if cli.experiment == Experiment::Selftest => ExperimentConfig::selftest_default(),
        None => return Err(CliError::Validation("--config is required for this experiment".into())),
    };
    if cfg.experiment != cli.experiment {
        return Err(CliError::Validation(format!(
            "experiment: config is for `{}` but `{}` was requested",
            cfg.experiment.name(),
            cli.experiment.name()
        )));
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &cli.output {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} workers: {e}", cfg.workers);
            return ExitCode::from(1);
        }
    };

    let started_unix_seconds = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let result = pool.install(|| experiments::run(&cfg));
    let timing = RunTiming {
        started_unix_seconds,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    };

    match result {
        Ok(report) => match output::write_run(&cfg, &report, &timing) {
            Ok(code) => {
                print!("{}", output::summary_text(&cfg, &report));
                ExitCode::from(code)
            }
            Err(e) => {
                eprintln!("error: writing outputs to {}: {e}", cfg.output_dir.display());
                ExitCode::from(1)
            }
        },
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {e}");
            if let Err(w) = output::write_failed_run(&cfg, e.to_string(), code, &timing) {
                log::warn!("could not write the manifest: {w}");
            }
            ExitCode::from(code)
        }
    }
}
