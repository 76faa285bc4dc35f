//! `rentgam`: clean rental listings, validate them against reference data,
//! fit and inspect the additive rent model, or simulate test data.
//!
//! Settings come from a flat `key = value` file (`--config`) overlaid by
//! flags. Exit status is 0 on success, 2 for input or configuration errors
//! and 3 for numerical or domain failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig, Settings};
use error::CliResult;

#[derive(Parser)]
#[command(name = "rentgam", version, about = "Rental listings analytics and additive rent models")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Raw listings file (delimited, or JSON lines for .jsonl).
    #[arg(long, global = true, value_name = "PATH")]
    listings: Option<PathBuf>,
    /// Postcode index: postcode,latitude,longitude,area_code,deprivation.
    #[arg(long, global = true, value_name = "PATH")]
    postcodes: Option<PathBuf>,
    /// Model JSON written by `fit`.
    #[arg(long, global = true, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Write a model matrix (design, penalty or covariance) as delimited text.
    #[arg(long, global = true, value_name = "NAME")]
    dump_matrix: Option<String>,
    /// Set any configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Deduplicate, validate and geocode listings; report exclusions.
    Clean,
    /// Compare clean listings with reference stock, flow and rents.
    Validate,
    /// Fit the additive rent model with BIC smoothness selection.
    Fit,
    /// Write effect surfaces with standard errors for every term.
    Surfaces,
    /// Parametric bootstrap tests of model terms.
    Bootstrap,
    /// Generate synthetic listings, postcode index and truth.
    Simulate,
}

fn settings(cli: &Cli) -> CliResult<Settings> {
    let mut s = match &cli.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    let path = |p: &PathBuf| p.to_string_lossy().into_owned();
    if let Some(p) = &cli.out {
        s.set("out", path(p))?;
    }
    if let Some(seed) = cli.seed {
        s.set("seed", seed.to_string())?;
    }
    if let Some(f) = cli.format {
        s.set("format", if f == Format::Json { "json" } else { "table" })?;
    }
    if let Some(p) = &cli.listings {
        s.set("listings", path(p))?;
    }
    if let Some(p) = &cli.postcodes {
        s.set("postcodes", path(p))?;
    }
    if let Some(p) = &cli.model {
        s.set("model", path(p))?;
    }
    if let Some(m) = &cli.dump_matrix {
        s.set("dump_matrix", m.clone())?;
    }
    for pair in &cli.set {
        s.set_pair(pair)?;
    }
    Ok(s)
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = RunConfig::from_settings(&settings(cli)?)?;
    match cli.command {
        Command::Clean => commands::clean(&cfg),
        Command::Validate => commands::validate(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Surfaces => commands::surfaces(&cfg),
        Command::Bootstrap => commands::bootstrap(&cfg),
        Command::Simulate => commands::simulate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
