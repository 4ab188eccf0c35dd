use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qcbound", version, about = "Certified Neumann eigenvalue and Poincaré constant bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: RunOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Bound a convex cell, a pair, a Whitney triple or a chain of triples.
    BoundCells,
    /// Bound the snowflake tree with a certified series tail.
    BoundSnowflake,
    /// Bound the two-piece star domain.
    BoundStar,
    /// Transfer a bound through a quasiconformal map.
    Transfer,
    /// Check a stored certificate against the finite-element oracle.
    Verify,
    /// Run several pipelines and emit one table.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::BoundCells => "bound-cells",
            Self::BoundSnowflake => "bound-snowflake",
            Self::BoundStar => "bound-star",
            Self::Transfer => "transfer",
            Self::Verify => "verify",
            Self::Report => "report",
        }
    }

    pub fn parse_name(name: &str) -> Option<Self> {
        [Self::BoundCells, Self::BoundSnowflake, Self::BoundStar, Self::Transfer, Self::Verify, Self::Report]
            .into_iter()
            .find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunOptions {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Exponent p (> 1); overrides the configuration.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Tree depth for the snowflake; overrides the configuration.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Target mesh edge length for oracle checks.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub h: f64,
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record wall-clock timings in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { config: None, p: None, depth: None, h: 0.05, seed: 0, format: Format::Json, out: None, timing: false }
    }
}
