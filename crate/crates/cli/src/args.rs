use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20240001;

#[derive(Debug, Parser)]
#[command(name = "tarry", version, about = "Experiments on the two-dimensional Tarry singular integral")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Critical threshold, N, alpha inverse and the divergent k-range.
    Exponent(ExponentArgs),
    /// Oscillatory integral J for a polynomial read from a JSON file.
    Integral(IntegralArgs),
    /// Truncated theta_k by stratified Monte Carlo, one or more radii.
    Theta(ThetaArgs),
    /// (alpha, beta) Plancherel mass for F = alpha*y + beta*x + gamma*xy.
    Parseval(ParsevalArgs),
    /// Gram determinant of a point configuration and its invariance checks.
    Gram(GramArgs),
    /// Thin-shell volume of the power-sum system.
    Thinshell(ThinshellArgs),
    /// Coefficient boxes: disjointness report and E-set margin sweep.
    Boxes(BoxesArgs),
    /// Growth of truncated theta_k across radii.
    Diagnose(DiagnoseArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Exponent(a) => &a.common,
            Command::Integral(a) => &a.common,
            Command::Theta(a) => &a.common,
            Command::Parseval(a) => &a.common,
            Command::Gram(a) => &a.common,
            Command::Thinshell(a) => &a.common,
            Command::Boxes(a) => &a.common,
            Command::Diagnose(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Weight {
    #[value(name = "none")]
    #[serde(rename = "none")]
    None,
    #[value(name = "sqrtG0")]
    #[serde(rename = "sqrtG0")]
    SqrtG0,
}

/// Options shared by every subcommand. `workers`, `output` and `config` do
/// not affect results and are left out of the echoed configuration.
#[derive(Debug, Args, Serialize)]
pub struct Common {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    #[serde(skip)]
    pub workers: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Key-value file of defaults; flags on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExponentArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct IntegralArgs {
    /// JSON file `{"n":..,"m":..,"coeffs":[{"i":..,"j":..,"value":..},..]}`.
    #[arg(long)]
    pub poly: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub k: u32,
    /// Truncation radius; a comma-separated list sweeps.
    #[arg(long = "radius", alias = "R", value_delimiter = ',', required = true)]
    #[serde(rename = "R")]
    pub radius: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ParsevalArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long = "radius", alias = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct GramArgs {
    /// JSON file `{"k":..,"points":[[x,y],..]}`.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    /// Translation `a,b` for the invariance check.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.25, -0.5], allow_negative_numbers = true)]
    pub shift: Vec<f64>,
    /// Dilation factor for the scaling check.
    #[arg(long, default_value_t = 2.0)]
    pub scale: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ThinshellArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = Weight::None)]
    pub weight: Weight,
    /// Target values u in graded monomial order; zero when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub target: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct BoxesArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub k: u32,
    /// Dyadic scales P.
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4, 8])]
    pub scales: Vec<u32>,
    /// Coefficient draws per box for the margin sweep.
    #[arg(long, default_value_t = 100)]
    pub beta_samples: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0, 40.0])]
    pub radii: Vec<f64>,
    /// Samples per radius.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}
