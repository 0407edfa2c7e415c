//! Command-line surface: each subcommand reads a model file, runs one pipeline and emits a
//! [`RunReport`].

pub mod pipelines;
pub mod report;
pub mod scan;

use std::fmt::Display;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use report::{Check, RunReport};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{module}: {message}")]
    Pipeline { module: &'static str, message: String },
}

impl CliError {
    pub fn pipeline(module: &'static str, e: impl Display) -> Self {
        CliError::Pipeline { module, message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Pipeline { .. } => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "feynlab", version, about = "Exact perturbative expansions of finite-dimensional integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit the report as JSON (default).
    #[arg(long, global = true, overrides_with = "text")]
    pub json: bool,
    /// Emit the report as `path = value` lines.
    #[arg(long, global = true, overrides_with = "json")]
    pub text: bool,
    /// Seed for randomized property suites; always echoed in the report.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DetModeArg {
    Abs,
    Signed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleModeArg {
    Oscillatory,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightModeArg {
    Partition,
    Effective,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stationary-phase series of an action model, checked against quadrature in one dimension.
    Expand {
        model: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// ħ values of the oracle scan.
        #[arg(long, value_delimiter = ',')]
        hbar: Vec<f64>,
        /// Erf window `lo:hi:width` per axis (comma separated).
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Skip the quadrature comparison.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Enumerate graphs and tabulate automorphism orders.
    Graphs {
        #[arg(long, default_value_t = 2)]
        max_excess: i64,
        #[arg(long, value_delimiter = ',', default_value = "3")]
        degrees: Vec<usize>,
        #[arg(long, overrides_with = "no_tadpoles")]
        tadpoles: bool,
        #[arg(long, overrides_with = "tadpoles")]
        no_tadpoles: bool,
        #[arg(long, default_value_t = 0)]
        leaves: usize,
        #[arg(long)]
        connected: bool,
        #[arg(long, value_enum, default_value_t = WeightModeArg::Partition)]
        mode: WeightModeArg,
    },
    /// Gaussian moments by perfect matchings, checked against the derivative oracle.
    Wick {
        model: PathBuf,
        /// Random tuples in the seeded oracle suite.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Faddeev-Popov expansion of a gauge model with BRST checks.
    Fp {
        model: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, value_enum, default_value_t = DetModeArg::Signed)]
        det_mode: DetModeArg,
    },
    /// Master equations, Lagrangian integral and pushforward of a BV model or a gauge model.
    Bv {
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Pairs to integrate out, each as field and antifield (`x3,x3+`).
        #[arg(long, value_delimiter = ',')]
        fiber: Vec<String>,
        #[arg(long, default_value_t = 6)]
        y_degree: u32,
        /// Random functions in the seeded BV-algebra suite.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Validate Lie structure constants and evaluate color weights.
    Lie { model: PathBuf },
    /// Quadrature ħ-scan of an action model with a remainder fit.
    Oracle {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleModeArg::Oscillatory)]
        mode: OracleModeArg,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, value_delimiter = ',')]
        hbar: Vec<f64>,
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        resolution: Option<usize>,
    },
}

pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    pipelines::dispatch(&cli.command, cli.seed)
}
