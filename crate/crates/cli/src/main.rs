use std::path::PathBuf;
use std::process::ExitCode;

use axdse_cli::{run, CliResult, Command, Engine, Overrides, Profile, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "axdse", version, about = "Surrogate-guided exploration of approximate accelerators")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "axdse-out")]
    out: PathBuf,

    /// Overrides the sample, model and search seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// desk or paper.
    #[arg(long, global = true)]
    profile: Option<String>,

    /// es, nsga2, hc or random.
    #[arg(long, global = true)]
    engine: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Generate and characterize the component library and datasets.
    Characterize,
    /// Label random configurations, fit the model presets and select one per target.
    Train,
    /// Search the configuration space with the trained surrogates.
    Explore,
    /// Re-score the explored front with the exact oracle.
    Evaluate,
    /// Emit plot data and SVG figures.
    Report,
    /// Run every stage in order.
    All,
}

fn execute(cli: &Cli) -> CliResult<()> {
    let overrides = Overrides {
        profile: cli.profile.as_deref().map(str::parse::<Profile>).transpose()?,
        seed: cli.seed,
        engine: cli.engine.as_deref().map(str::parse::<Engine>).transpose()?,
    };
    let config = match &cli.config {
        Some(p) => RunConfig::load(p, &overrides)?,
        None => {
            let mut c = RunConfig::defaults(overrides.profile.unwrap_or(Profile::Paper));
            c.apply(&overrides);
            c
        }
    };
    let command = match cli.command {
        Cmd::Characterize => Command::Characterize,
        Cmd::Train => Command::Train,
        Cmd::Explore => Command::Explore,
        Cmd::Evaluate => Command::Evaluate,
        Cmd::Report => Command::Report,
        Cmd::All => Command::All,
    };
    run(command, &config, &cli.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
