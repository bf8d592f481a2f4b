//! `xyrange` command line: parameter sweeps written as stamped CSV files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<xyrange::Error> for CliError {
    fn from(e: xyrange::Error) -> Self {
        use xyrange::Error as E;
        match e {
            E::InvalidModel(_) | E::InvalidArgument(_) | E::SizeLimit { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "xyrange", version, about = "Entanglement sweeps of the variable-range anisotropic XY ring")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_name = "K")]
    workers: Option<usize>,

    /// Seed for the product-state restarts; overrides the config
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// E_r against the field, one file per range
    Profile,
    /// predicted and observed factorization points
    Facpoint,
    /// nearest-neighbour entanglement and witness against β
    Thermal,
    /// entanglement length against the range
    Length,
    /// monogamy sums against the field
    Monogamy,
    /// β* against the field at full range, with plateaus
    Rigidity,
    /// product-state and ground energies at the predicted field
    #[command(name = "tableI")]
    TableOne,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Facpoint => "facpoint",
            Command::Thermal => "thermal",
            Command::Length => "length",
            Command::Monogamy => "monogamy",
            Command::Rigidity => "rigidity",
            Command::TableOne => "tableI",
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let source = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(cli.command.name(), &source)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(k) = cli.workers.or(cfg.workers) {
        if k == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }

    let tables = match cli.command {
        Command::Profile => commands::profile_cmd(&cfg),
        Command::Facpoint => commands::facpoint_cmd(&cfg),
        Command::Thermal => commands::thermal_cmd(&cfg),
        Command::Length => commands::length_cmd(&cfg),
        Command::Monogamy => commands::monogamy_cmd(&cfg),
        Command::Rigidity => commands::rigidity_cmd(&cfg),
        Command::TableOne => commands::table_one_cmd(&cfg),
    }?;
    output::write_tables(&cli.out, &tables, &cfg.stamp(), cfg.precision)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", cli.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("xyrange: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(CliError::from(xyrange::Error::InvalidModel("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(xyrange::Error::InvalidArgument("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(xyrange::Error::NotConverged("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(xyrange::Error::DegeneracyTruncated("x".into())).exit_code(), 3);
        assert_eq!(output::format_sig(f64::NAN, 9).unwrap_err().exit_code(), 3);
    }
}
