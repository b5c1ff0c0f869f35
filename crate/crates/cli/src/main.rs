//! Command-line front end: parse the flags, load one JSON configuration,
//! run a subcommand, exit 0 on success, 1 on runtime failure or an
//! uncertified axiom verdict, 2 on configuration problems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::RunContext;
use config::{ConfigError, RunConfig};

pub enum CliError {
    Config(ConfigError),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<collective_ramsey::ModelError> for CliError {
    fn from(e: collective_ramsey::ModelError) -> Self {
        CliError::Runtime(anyhow::Error::new(e))
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

#[derive(Parser)]
#[command(
    name = "collective-ramsey",
    version,
    about = "Collective savings plans under heterogeneous discounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for the emitted artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the solver sweeps; default is all cores. Outputs
    /// do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized sampling (the axioms payment grid); everything
    /// else is deterministic
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the collective plan, simulate it, and write trajectory plus summary
    Solve(RunArgs),
    /// Solve and simulate, writing the trajectory only
    Simulate(RunArgs),
    /// Check stationarity, time invariance, and time consistency on sampled payments
    Axioms(RunArgs),
    /// Contrast the carried-weight plan with the constant-weight regime
    Compare(RunArgs),
    /// Emit the closed-form discounting and savings-rate oracles
    Oracle(RunArgs),
}

type CommandFn = fn(&RunContext) -> Result<ExitCode, CliError>;

fn dispatch(cmd: Cmd) -> Result<ExitCode, CliError> {
    let (args, run): (RunArgs, CommandFn) = match cmd {
        Cmd::Solve(a) => (a, commands::solve),
        Cmd::Simulate(a) => (a, commands::simulate),
        Cmd::Axioms(a) => (a, commands::axioms),
        Cmd::Compare(a) => (a, commands::compare),
        Cmd::Oracle(a) => (a, commands::oracle),
    };
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(anyhow::anyhow!("thread pool: {e}")))?;
    }
    let config = RunConfig::load(&args.config)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("creating {}: {e}", args.out.display())))?;
    let ctx = RunContext {
        config,
        out: args.out,
        seed: args.seed,
    };
    run(&ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
