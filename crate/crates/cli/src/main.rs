mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use saffron_core::format::Precision;
use saffron_core::simulation::ModelKind;
use saffron_core::GammaKind;

use config::{
    load, to_toml, Method, OfflineFlags, OfflineSettings, StreamFlags, StreamSettings, SweepFlags,
    SweepSettings,
};
use error::CliError;

/// Online false discovery rate control: simulation sweeps, streaming
/// decisions and offline baselines.
#[derive(Parser, Debug)]
#[command(name = "saffron", version)]
struct Cli {
    /// Progress and summaries on stderr.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo grid and write one CSV row per cell.
    Sweep(SweepArgs),
    /// Read p-values one per line and print each decision as it is made.
    Stream(StreamArgs),
    /// Apply BH or Storey-BH to a batch of p-values.
    Offline(OfflineArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file with flag-named keys; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the resolved config in canonical form and exit.
    #[arg(long)]
    print_config: bool,

    /// Target FDR level.
    #[arg(long)]
    alpha: Option<f64>,

    /// Candidacy threshold for saffron, or the Storey threshold offline [default: 0.5].
    #[arg(long)]
    lambda: Option<f64>,

    /// Significant digits of printed floats, or "full".
    #[arg(long)]
    precision: Option<Precision>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,

    /// gaussian:<mu_c> or beta:<m>,<n> [default: gaussian:3]
    #[arg(long)]
    model: Option<ModelKind>,

    /// saffron, saffron-ai, lord or alpha-investing; repeat or comma-separate [default: saffron]
    #[arg(long, value_delimiter = ',')]
    procedure: Vec<String>,

    /// power:<s>, log-optimal or beta:<m>; repeat or comma-separate [default: power:1.6]
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<GammaKind>,

    /// Non-null fractions; repeat or comma-separate [default: 0.1,...,0.9]
    #[arg(long, value_delimiter = ',')]
    pi1: Vec<f64>,

    /// Initial wealth [default: alpha/2]
    #[arg(long)]
    w0: Option<f64>,

    /// Stream length [default: 1000]
    #[arg(long = "T", alias = "horizon")]
    horizon: Option<usize>,

    /// Trials per cell [default: 200]
    #[arg(long)]
    trials: Option<usize>,

    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads [default: all cores]
    #[arg(long)]
    threads: Option<usize>,

    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StreamArgs {
    #[command(flatten)]
    common: Common,

    /// [default: saffron]
    #[arg(long)]
    procedure: Option<String>,

    /// [default: power:1.6]
    #[arg(long)]
    gamma: Option<GammaKind>,

    /// Initial wealth [default: alpha/2]
    #[arg(long)]
    w0: Option<f64>,

    /// Read from this file instead of stdin ("-" for stdin).
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OfflineArgs {
    #[command(flatten)]
    common: Common,

    /// bh or storey [default: bh]
    #[arg(long)]
    method: Option<Method>,

    /// One p-value per line ("-" or absent for stdin).
    #[arg(value_name = "FILE")]
    input: Option<PathBuf>,

    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let verbose = cli.verbose > 0;
    match cli.command {
        Command::Sweep(a) => {
            let flags = SweepFlags {
                model: a.model,
                procedure: a.procedure,
                gamma: a.gamma,
                pi1: a.pi1,
                alpha: a.common.alpha,
                w0: a.w0,
                lambda: a.common.lambda,
                horizon: a.horizon,
                trials: a.trials,
                seed: a.seed,
                precision: a.common.precision,
                threads: a.threads,
                out: a.out,
            };
            let settings = SweepSettings::resolve(flags, load(a.common.config.as_deref())?)?;
            if a.common.print_config {
                print!("{}", to_toml(&settings.canonical()));
                return Ok(());
            }
            commands::run_sweep(&settings, verbose)
        }
        Command::Stream(a) => {
            let flags = StreamFlags {
                procedure: a.procedure,
                gamma: a.gamma,
                alpha: a.common.alpha,
                w0: a.w0,
                lambda: a.common.lambda,
                precision: a.common.precision,
                input: a.input,
            };
            let settings = StreamSettings::resolve(flags, load(a.common.config.as_deref())?)?;
            if a.common.print_config {
                print!("{}", to_toml(&settings.canonical()));
                return Ok(());
            }
            commands::run_stream(&settings)
        }
        Command::Offline(a) => {
            let flags = OfflineFlags {
                method: a.method,
                alpha: a.common.alpha,
                lambda: a.common.lambda,
                precision: a.common.precision,
                input: a.input,
                out: a.out,
            };
            let settings = OfflineSettings::resolve(flags, load(a.common.config.as_deref())?)?;
            if a.common.print_config {
                print!("{}", to_toml(&settings.canonical()));
                return Ok(());
            }
            commands::run_offline(&settings)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
