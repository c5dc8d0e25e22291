//! `covertime`: command-line front end for cover-time analysis and partition constructions.

mod commands;
mod input;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use covertime_core::Error;

use commands::{CoverArgs, MartingaleArgs, ParamsArgs, PartitionCmd, SpectralArgs};

#[derive(Parser)]
#[command(name = "covertime", version, about = "Cover-time analysis of finite Markov chains")]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, env = "COVERTIME_THREADS", global = true)]
    threads: Option<usize>,
    /// Suppress the human summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability that a walk covers a target set within a horizon.
    Cover(CoverArgs),
    /// Build or verify partitions.
    #[command(subcommand)]
    Partition(PartitionCmd),
    /// Simulate walks and check the martingale, association and concentration bounds.
    Martingale(MartingaleArgs),
    /// Spectrum, expander test and expander bound tables.
    Spectral(SpectralArgs),
    /// Log-space constants for given (C, β, λ).
    Params(ParamsArgs),
}

pub(crate) fn bad(msg: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        msg: msg.into(),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::InvalidGraph(_)
        | Error::InvalidChain(_)
        | Error::InvalidPartition(_) => 2,
        Error::Budget(_) => 3,
        Error::Verification(_) => 5,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Cover(a) => commands::cover(a),
        Command::Partition(p) => commands::partition(p),
        Command::Martingale(a) => commands::martingale(a),
        Command::Spectral(a) => commands::spectral(a),
        Command::Params(a) => commands::params(a),
    };
    match outcome {
        Ok((json, summary)) => {
            let text = serde_json::to_string_pretty(&json).expect("values serialize");
            // A closed pipe downstream is not an error of the run.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if !cli.quiet {
                eprintln!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
