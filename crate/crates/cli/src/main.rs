use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qphonon::commands::{
    cmd_algebra_check, cmd_dressed_check, cmd_evolve, cmd_rabi, cmd_sweep, RunContext,
};
use qphonon::config::{parse_config, CommandConfig};
use qphonon::error::{CliError, Result};

/// Fock-sector phonon simulations driven by a JSON config.
#[derive(Parser)]
#[command(name = "qphonon", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify operator identities over configured sector sizes.
    AlgebraCheck(RunArgs),
    /// Evolve the driven vacuum and tabulate exact vs first-order observables.
    Evolve(RunArgs),
    /// Scan sector sizes and tabulate convergence of the first-order errors.
    Sweep(RunArgs),
    /// Verify the three-mode construction and its reduction to the pair form.
    DressedCheck(RunArgs),
    /// Cross-check population exchange against the closed-form solution.
    Rabi(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Where outputs land; overrides the config, defaults to ".".
    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Worker threads for parallel commands (defaults to all cores).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // A panic anywhere in a run is a failed run, not a crash with a
    // nonstandard code: report it and exit 1 like any other assertion.
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(&cli)));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            eprintln!("error: internal panic: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (invoked, args) = match &cli.command {
        Command::AlgebraCheck(a) => ("algebra-check", a),
        Command::Evolve(a) => ("evolve", a),
        Command::Sweep(a) => ("sweep", a),
        Command::DressedCheck(a) => ("dressed-check", a),
        Command::Rabi(a) => ("rabi", a),
    };

    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let doc = parse_config(&text)?;
    if doc.command.name() != invoked {
        return Err(CliError::Config(format!(
            "command: config declares '{}' but the '{invoked}' subcommand was invoked",
            doc.command.name()
        )));
    }

    let output_dir = args
        .output_dir
        .clone()
        .or(doc.output_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&output_dir).map_err(|e| {
        CliError::Config(format!(
            "output_dir: cannot create {}: {e}",
            output_dir.display()
        ))
    })?;

    let ctx = RunContext {
        output_dir,
        workers: args.workers.map(|w| w as usize),
        seed: doc.seed,
    };

    match &doc.command {
        CommandConfig::AlgebraCheck(cfg) => cmd_algebra_check(&ctx, cfg),
        CommandConfig::Evolve(cfg) => cmd_evolve(&ctx, cfg),
        CommandConfig::Sweep(cfg) => cmd_sweep(&ctx, cfg),
        CommandConfig::DressedCheck(cfg) => cmd_dressed_check(&ctx, cfg),
        CommandConfig::Rabi(cfg) => cmd_rabi(&ctx, cfg),
    }
}
