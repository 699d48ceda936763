mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status contract: 0 success, 1 failed check, 2 usage/configuration
/// error.
pub(crate) enum CmdOutcome {
    Ok,
    CheckFailed,
}

#[derive(Debug, Parser)]
#[command(
    name = "gshift",
    about = "Shift-operator self-tests, approximation/modulus curves, and theorem verification",
    version
)]
struct Cli {
    /// Run configuration file (defaults to $GSHIFT_CONFIG).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,
    /// Skip the self-test stamp check.
    #[arg(long, global = true)]
    force: bool,
    /// Resolution multiplier applied to every configured node count.
    #[arg(long, global = true, value_name = "K")]
    resolution: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify the kernel transcription and probe the operator-norm bound.
    Selftest,
    /// Write best-approximation and modulus curves as CSV plus a plot script.
    Curves,
    /// Run the Jackson, inverse, direct, and coincidence checks.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = config::RunContext::prepare(
        cli.config.as_deref(),
        cli.output.as_deref(),
        cli.resolution,
        cli.force,
    );
    let run = match run {
        Ok(run) => run,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Selftest => commands::cmd_selftest(&run),
        Command::Curves => commands::cmd_curves(&run),
        Command::Verify => commands::cmd_verify(&run),
    };
    match outcome {
        Ok(CmdOutcome::Ok) => ExitCode::SUCCESS,
        Ok(CmdOutcome::CheckFailed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
