//! Thin command-line front end over [`opsplit::bench`].
//!
//! Reports go to stdout as JSON; one-line human summaries go to stderr.
//! Exit codes: 0 success, 2 validation failure, 3 requested convergence
//! not reached, 4 numerical failure.

use clap::{Parser, Subcommand};
use opsplit::bench::{
    compare_relaxation, constants_compare_json, constants_compose_json, constants_fb_json,
    error_exit_code, error_json, run_batch, run_spec, ProblemSpec,
};
use opsplit::Error;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "opsplit",
    version,
    about = "Benchmark harness for averaged-operator splitting algorithms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print averagedness constants and relaxation ranges as JSON.
    Constants {
        #[command(subcommand)]
        which: ConstantsCommand,
    },
    /// Run one JSON problem spec and print its report.
    Run {
        /// Path to the spec file.
        spec: PathBuf,
    },
    /// Run a spec under the conservative and the sharp relaxation cap and
    /// print the comparison.
    Compare {
        /// Path to the spec file.
        spec: PathBuf,
    },
    /// Run every *.json spec in a directory (sorted by file name).
    Batch {
        /// Directory of spec files.
        dir: PathBuf,
        /// Number of worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Subcommand)]
enum ConstantsCommand {
    /// Sharp averagedness constant of a composition.
    Compose {
        /// Comma-separated averagedness constants in ]0, 1[.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Slack for the extended relaxation range.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Sharp constant next to the classical bounds it improves on.
    Compare {
        /// Comma-separated averagedness constants in ]0, 1[.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
    },
    /// Forward-backward step constant and relaxation cap.
    Fb {
        /// Cocoercivity modulus of the forward map.
        #[arg(long)]
        beta: f64,
        /// Step size in [eps, 2*beta/(1+eps)].
        #[arg(long)]
        gamma: f64,
        /// Slack.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report types serialize infallibly")
    );
}

fn fail(e: &Error) -> i32 {
    print_json(&error_json(e));
    error_exit_code(e)
}

fn execute() -> i32 {
    match Cli::parse().command {
        Command::Constants { which } => {
            let result = match which {
                ConstantsCommand::Compose { alphas, eps } => constants_compose_json(&alphas, eps),
                ConstantsCommand::Compare { alphas } => constants_compare_json(&alphas),
                ConstantsCommand::Fb { beta, gamma, eps } => constants_fb_json(beta, gamma, eps),
            };
            match result {
                Ok(value) => {
                    print_json(&value);
                    0
                }
                Err(e) => fail(&e),
            }
        }
        Command::Run { spec } => {
            match ProblemSpec::from_file(&spec).and_then(|s| run_spec(&s)) {
                Ok(outcome) => {
                    eprintln!("{}", outcome.report.summary());
                    print_json(&outcome.report);
                    outcome.report.exit_code()
                }
                Err(e) => fail(&e),
            }
        }
        Command::Compare { spec } => {
            match ProblemSpec::from_file(&spec).and_then(|s| compare_relaxation(&s)) {
                Ok(report) => {
                    eprintln!("{}", report.summary());
                    print_json(&report);
                    0
                }
                Err(e) => fail(&e),
            }
        }
        Command::Batch { dir, jobs } => match run_batch(&dir, jobs) {
            Ok(report) => {
                for entry in &report.entries {
                    match &entry.report {
                        Some(r) => eprintln!("{}", r.summary()),
                        None => eprintln!("{}: failed (exit {})", entry.path, entry.exit_code),
                    }
                }
                print_json(&report);
                report.exit_code()
            }
            Err(e) => fail(&e),
        },
    }
}

fn main() -> ExitCode {
    ExitCode::from(u8::try_from(execute()).unwrap_or(4))
}
