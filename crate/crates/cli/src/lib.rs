//! `perm`: exact permanents, estimators, variance enumeration and self-checks
//! from the command line.

pub mod commands;
pub mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::execute;
pub use report::RunReport;

/// Seed used when `--seed` is not given, so runs reproduce by default.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Sample cap for runs that only set `--epsilon`.
pub const EPSILON_ONLY_CAP: u64 = 100_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "perm",
    version,
    about = "Matrix permanents: exact algorithms and unbiased estimators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact permanent.
    Exact(ExactArgs),
    /// Monte Carlo estimate with a stopping rule.
    Estimate(EstimateArgs),
    /// Exact mean and variance of an estimator by enumerating its configurations.
    Variance(VarianceArgs),
    /// Check the decoupling identities and cross-check the algorithms.
    Verify(VerifyArgs),
    /// Time exact algorithms on seeded random 0-1 matrices.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Matrix file (whitespace text or JSON); `-` reads stdin.
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactAlg {
    Naive,
    Ryser,
    Glynn,
    GaugeZ2,
    GaugeZp,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long, value_enum, default_value_t = ExactAlg::Glynn)]
    pub alg: ExactAlg,
    /// Phase order for gauge-zp.
    #[arg(long)]
    pub p: Option<u32>,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub override_size_guard: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorAlg {
    Gg,
    Kkll,
    Pairing,
    Gauge,
    Custom,
    Recursive,
    LuMc,
    SvdMc,
}

impl fmt::Display for EstimatorAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// Estimator selection shared by `estimate` and `variance`.
#[derive(Debug, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum)]
    pub alg: Option<EstimatorAlg>,
    /// Phase order (kkll defaults to 3, pairing and gauge to 2).
    #[arg(long)]
    pub p: Option<u32>,
    /// Decoupling scheme JSON for `custom`.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Recursion depth for `recursive`; depths above 1 are sample-only.
    #[arg(long, default_value_t = 1)]
    pub depth: u32,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Sample cap.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Target relative half-width of the confidence interval.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    /// Integer seed, or `random` for an entropy seed.
    #[arg(long)]
    pub seed: Option<String>,
    /// Independent sample streams (default: hardware threads).
    #[arg(long)]
    pub streams: Option<u64>,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Two estimators, e.g. `gauge:p=2,gauge:p=3`; reports the second-moment ratio.
    #[arg(long, conflicts_with = "alg")]
    pub compare: Option<String>,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub max_n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Perturb the root-of-unity tables (self-test of the checker).
    #[arg(long, hide = true)]
    pub inject_root_fault: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated exact algorithms.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ExactAlg::Ryser, ExactAlg::Glynn])]
    pub alg: Vec<ExactAlg>,
    /// Inclusive range `A..B`.
    #[arg(long, default_value = "4..12")]
    pub n_range: String,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Phase order for gauge-zp.
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub override_size_guard: bool,
}

/// Failure of a subcommand, with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Core(permlab::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Usage(String),
    VerifyFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use permlab::Error as E;
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::Parse { .. } | E::EmptyInput | E::Parameter(_) => 2,
                E::Shape(_) => 3,
                E::SizeGuard(_) => 4,
                _ => 5,
            },
        }
    }

    /// Short category for the reason line.
    pub fn kind(&self) -> &'static str {
        use permlab::Error as E;
        match self {
            CliError::VerifyFailed(_) => "verify",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                E::Parse { .. } | E::EmptyInput => "parse",
                E::Parameter(_) => "usage",
                E::Shape(_) => "shape",
                E::SizeGuard(_) => "size-guard",
                E::Domain(_) => "domain",
                E::Configuration(_) => "configuration",
                E::Unsupported(_) => "unsupported",
                _ => "numeric",
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(s) => f.write_str(s),
            CliError::VerifyFailed(names) => write!(f, "failed: {}", names.join("; ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<permlab::Error> for CliError {
    fn from(e: permlab::Error) -> Self {
        CliError::Core(e)
    }
}
