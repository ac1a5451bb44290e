use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use lfot_cli::{report, run_and_emit, Experiment, Overrides, EXIT_CONFIG, THREADS_ENV};

#[derive(Parser)]
#[command(name = "lfot", version, about = "Run Lorentz-Finsler transport experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the check described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Output prefix; `<PREFIX>.json` and `<PREFIX>.csv` are written.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG as u8)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV}={raw} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    let Command::Run {
        config,
        seed,
        samples,
        out,
    } = cli.command;
    let exp = match Experiment::load(&config, &Overrides { seed, samples, out }) {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    match run_and_emit(&exp) {
        Ok((outcome, _, _)) => {
            println!("{}", report::verdict_line(&exp, &outcome));
            ExitCode::from(report::exit_code(outcome.verdict) as u8)
        }
        Err(e) => fail(e),
    }
}
