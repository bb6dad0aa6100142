use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "gram-moments",
    version,
    about = "Moments of one-sided correlated Gram matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Moment table from a registered method
    Moments(MomentsArgs),
    /// Deterministic-equivalent inverse moments
    Asymptotic(AsymptoticArgs),
    /// Monte Carlo estimate of one or more moments
    Mc(McArgs),
    /// BLUE mean square error, closed form and Monte Carlo
    Blue(AppArgs),
    /// LMMSE mean square error series and Monte Carlo
    Lmmse(LmmseArgs),
    /// Weighted sample covariance loss over a forgetting-factor grid
    Scm(ScmArgs),
    /// Datasets behind the six reference figures
    Figures(FiguresArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelArg {
    /// Dense-scattering Bessel correlation
    Bessel,
    /// Identity plus a random Wishart matrix
    Randpd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Exactly one of `--model`, `--spectrum`, `--matrix`.
#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// JSON file `{"thetas": [...], "m": 3}`
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// JSON file `{"re": [[...]], "im": [[...]]}` holding a Hermitian matrix
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Inclusive integer range `a..b` or a single order; 0 is skipped
    #[arg(long, allow_hyphen_values = true)]
    pub orders: String,
    #[arg(long, default_value = "exact")]
    pub method: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct AsymptoticArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, allow_hyphen_values = true, default_value = "-3..-1")]
    pub orders: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "orders")]
    pub order: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub orders: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct AppArgs {
    /// Noise covariance source
    #[command(flatten)]
    pub source: SourceArgs,
    /// Monte Carlo trials; 0 skips the simulation
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct LmmseArgs {
    #[command(flatten)]
    pub app: AppArgs,
    /// Prior variances, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma_x2: Vec<f64>,
    /// Last index of the high-SNR series; defaults to p - 1
    #[arg(long)]
    pub high_order: Option<usize>,
    /// Last index of the low-SNR series
    #[arg(long, default_value_t = 8)]
    pub low_order: usize,
    /// Which series to emit. With `both`, a low-SNR series that has stopped
    /// shrinking is listed under `skipped`; with `low` it is an error.
    #[arg(long, value_enum, default_value_t = Series::Both)]
    pub series: Series,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Series {
    High,
    Low,
    Both,
}

#[derive(Args, Debug)]
pub struct ScmArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Forgetting factors, comma separated; defaults to 0.05, 0.10, ..., 0.95
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Monte Carlo trials per factor; 0 skips the simulation
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FiguresArgs {
    /// Figure numbers 1 to 6, comma separated; all when absent
    #[arg(long, value_delimiter = ',')]
    pub which: Vec<u8>,
    /// Monte Carlo trials per point
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory receiving `fig<k>.csv` or `fig<k>.json`
    #[arg(long, default_value = "figures")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}
