use std::path::PathBuf;
use std::process::ExitCode;

use afenv_cli::error::EXIT_USAGE;
use afenv_cli::{resolve_seed, run, CliError, Command, Format, MRange, Options, Verb};
use clap::error::ErrorKind;
use clap::Parser;

/// Contractive regular direct systems of digraph spaces: compression-type
/// decisions, Bratteli diagrams and C*-envelopes.
#[derive(Debug, Parser)]
#[command(name = "afenv", version)]
struct Cli {
    #[arg(value_enum)]
    verb: Verb,
    /// System file (a single map file for decide/witness/probe, a diagram
    /// file for roundtrip).
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Overridden by the AFENV_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cycle lengths for `norms`, e.g. 2..8 (inclusive).
    #[arg(long, default_value = "2..10")]
    m: MRange,
    /// Directory receiving the output files.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::Usage(e.to_string().trim_end().to_string()).to_json());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let seed = match resolve_seed(cli.seed, std::env::var("AFENV_SEED").ok().as_deref()) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let cmd = Command {
        verb: cli.verb,
        input: cli.input,
        options: Options {
            tol: cli.tol,
            trials: cli.trials,
            seed,
            format: cli.format,
            m: cli.m,
            out: cli.out,
        },
    };
    match run(&cmd) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => fail(&e),
    }
}
