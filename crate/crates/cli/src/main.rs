//! `frontlab`: certify, solve and simulate drift-blocked bistable fronts.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures (the failing stage is named on stderr), 1 for anything else.

mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ConfigError;
use pipeline::StageError;

#[derive(Parser, Debug)]
#[command(name = "frontlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Dotted-path config override such as `run.dt=0.001`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Evaluate the blocking criterion for the configured drift.
    Certify,
    /// Solve for the traveling wave of the drift-free problem.
    Wave,
    /// Build and check the stationary supersolution.
    Supersolution,
    /// Run the time-dependent simulation with all monitors.
    Run,
    /// Certify and simulate a grid of mollified indicator drifts.
    Sweep,
}

fn execute(cli: &Cli) -> anyhow::Result<pipeline::Outcome> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?,
        None => "{}".to_string(),
    };
    let cfg = config::load(&text, &cli.overrides)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        if !frontlab_core::parallel::configure_threads(n) {
            log::warn!("thread count ignored: pool already running or built without the parallel feature");
        }
    }
    let out = pipeline::output_dir(&cfg, cli.out.clone())?;
    log::info!("writing artifacts to {}", out.display());
    match cli.command {
        Command::Certify => pipeline::certify(&cfg, &out),
        Command::Wave => pipeline::wave_only(&cfg, &out),
        Command::Supersolution => pipeline::supersolution(&cfg, &out),
        Command::Run => pipeline::run_pipeline(&cfg, &out),
        Command::Sweep => pipeline::sweep(&cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FRONTLAB_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            match outcome.failure {
                Some(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else if e.downcast_ref::<StageError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
