//! `tdse` — propagate 1D Gaussian wave packets with the Crank-Nicolson
//! schemes and stream observable records for error analysis.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};

use config::CommonArgs;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "tdse",
    version,
    about = "1D Schrödinger wave-packet propagation with tridiagonal and pentadiagonal \
             Crank-Nicolson schemes",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one scenario and stream observable records.
    Run(CommonArgs),
    /// Run both schemes on identical inputs and tabulate their errors.
    Compare(CommonArgs),
    /// Estimate each scheme's order of accuracy over a list of spacings.
    Converge(ConvergeArgs),
}

#[derive(clap::Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated grid spacings, e.g. --dx 0.4,0.2,0.1
    #[arg(long, value_delimiter = ',')]
    dx: Option<Vec<f64>>,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => commands::run_scenario(&args.resolve()?),
        Command::Compare(args) => commands::compare_schemes(&args.resolve()?),
        Command::Converge(args) => {
            let dt_given = args.common.dt.is_some();
            let config = args.common.resolve()?;
            commands::convergence_study(&config, args.dx, dt_given)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };

    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        let mut source = std::error::Error::source(&err);
        while let Some(cause) = source {
            eprintln!("  caused by: {cause}");
            source = cause.source();
        }
        std::process::exit(err.exit_code());
    }
}
