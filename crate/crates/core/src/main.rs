use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use riesz_hj::certificate::{Certificate, Timing};
use riesz_hj::commands::{self, CommandError, RunOptions};
use riesz_hj::instance::{parse_instance, InputError};
use riesz_hj::rational;

/// Exact Hahn-Jordan decompositions, partial inverses and Riesz-Frechet
/// representers on finite Riesz spaces with a conditional expectation.
#[derive(Parser)]
#[command(name = "riesz-hj", version)]
struct Cli {
    /// Print the certificate as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timing in the certificate.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hahn-Jordan decomposition of the instance's charge (or density charge).
    Decompose {
        file: PathBuf,
        /// Greedy parameter, a rational greater than 1.
        #[arg(long, value_parser = parse_theta)]
        theta: Option<rational::Rational>,
        /// Check exhaustively over every member of the algebra.
        #[arg(long)]
        oracle: bool,
        /// Largest atom count the exhaustive oracle accepts.
        #[arg(long, default_value_t = commands::DEFAULT_ORACLE_BOUND)]
        oracle_bound: usize,
    },
    /// Exact and dyadic representer of the instance's functional.
    Represent {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        depth: Option<u32>,
    },
    /// Canonical partial inverse of the instance's density.
    Invert {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        depth: Option<u32>,
    },
    /// Every applicable check.
    Verify { file: PathBuf },
    /// Seeded property campaign over random instances.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
}

fn parse_theta(s: &str) -> Result<rational::Rational, String> {
    let r = rational::parse(s).map_err(|e| e.to_string())?;
    if r <= rational::int(1) {
        return Err("theta must be greater than 1".into());
    }
    Ok(r)
}

fn load(path: &PathBuf) -> Result<riesz_hj::Instance, CommandError> {
    let bytes = std::fs::read(path)
        .map_err(|e| InputError::new("", format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_instance(&bytes)?)
}

fn run(command: Command) -> Result<Certificate, CommandError> {
    match command {
        Command::Decompose {
            file,
            theta,
            oracle,
            oracle_bound,
        } => {
            let opts = RunOptions {
                theta,
                oracle,
                oracle_bound: Some(oracle_bound),
                depth: None,
            };
            commands::run_decompose(&load(&file)?, &opts)
        }
        Command::Represent { file, depth } => commands::run_represent(
            &load(&file)?,
            &RunOptions {
                depth,
                ..Default::default()
            },
        ),
        Command::Invert { file, depth } => commands::run_invert(
            &load(&file)?,
            &RunOptions {
                depth,
                ..Default::default()
            },
        ),
        Command::Verify { file } => commands::run_verify(&load(&file)?, &RunOptions::default()),
        Command::Selftest { seed, trials } => commands::run_selftest(seed, trials as usize),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli.command) {
        Ok(mut cert) => {
            if cli.timing {
                cert.timing = Some(Timing {
                    elapsed_ms: start.elapsed().as_millis(),
                });
            }
            if cli.json {
                print!("{}", cert.to_json());
            } else {
                print!("{}", cert.to_text());
            }
            if cert.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
