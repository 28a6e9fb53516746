use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tempo_cli::commands;
use tempo_cli::{parse_sweep, CliError, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "tempo", version, about = "Event-triggered control over bounded-delay digital channels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-loop run: trajectory.csv, events.csv, summary.json.
    Simulate(Common),
    /// Rate bounds at a point or over a sweep: bounds.csv.
    Bounds(Common),
    /// Worst-case delay replay against the minimal quantizer.
    Adversary(Common),
    /// Cart-pendulum run; the config is optional.
    Pendulum(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// `gamma:lo:hi:n`, overrides the config sweep.
    #[arg(long)]
    sweep: Option<String>,
}

fn load(c: &Common, pendulum: bool) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&c.config, pendulum) {
        (Some(p), _) => ExperimentConfig::from_path(p)?,
        (None, true) => ExperimentConfig::pendulum_default(),
        (None, false) => return Err(CliError::Config("--config is required".into())),
    };
    if pendulum && cfg.mode != Mode::Pendulum {
        return Err(CliError::Config("the pendulum command needs mode = \"pendulum\"".into()));
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = &c.sweep {
        cfg.sweep = Some(parse_sweep(s)?);
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Simulate(c) => commands::simulate(&load(&c, false)?, &c.out_dir),
        Cmd::Bounds(c) => commands::bounds(&load(&c, false)?, &c.out_dir),
        Cmd::Adversary(c) => commands::adversary(&load(&c, false)?, &c.out_dir),
        Cmd::Pendulum(c) => commands::simulate(&load(&c, true)?, &c.out_dir),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tempo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
