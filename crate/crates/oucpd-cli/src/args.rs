//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "oucpd",
    version,
    about = "Change-point detection for mean-reverting (generalised OU) series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Simulate a regime-switching mean-reverting series to CSV.
    Simulate(SimulateArgs),
    /// Detect change points in a CSV series.
    Detect(DetectArgs),
    /// Monte-Carlo study of change-location estimates (known m).
    McRates(McRatesArgs),
    /// Monte-Carlo study of the estimated number of change points.
    McCount(McCountArgs),
    /// Render a series plot (optionally with a saved detection result).
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisChoice {
    Constant,
    Case2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Lsse,
    Mll,
}

impl MethodChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodChoice::Lsse => "lsse",
            MethodChoice::Mll => "mll",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMethodChoice {
    Lsse,
    Mll,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyChoice {
    Sic,
    Aic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoAlgorithm {
    Sns,
    Pelt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountAlgorithmChoice {
    Sns,
    Pelt,
}

/// `--sigma realized` or an explicit positive value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaSpec {
    Realized,
    Value(f64),
}

pub fn parse_sigma(s: &str) -> Result<SigmaSpec, String> {
    if s.eq_ignore_ascii_case("realized") {
        return Ok(SigmaSpec::Realized);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected 'realized' or a number, got '{s}'"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("sigma must be positive, got {v}"));
    }
    Ok(SigmaSpec::Value(v))
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Drift family: 1 = constant level, 2 = constant + cosine level.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case: u8,
    /// Number of change points (2 or 3 with tabulated coefficients).
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Change fractions, comma separated (defaults to the tabulated ones).
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// Horizon in time units.
    #[arg(long = "T")]
    pub horizon: f64,
    /// Grid step (default: T / 1000).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    /// Initial value (default: first regime's long-run level).
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output CSV path (a .meta.json sidecar is written next to it).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Grid step of the series (always explicit, never inferred).
    #[arg(long)]
    pub dt: f64,
    #[arg(long, default_value = "t")]
    pub time_col: String,
    #[arg(long, default_value = "x")]
    pub value_col: String,
    /// Natural-log transform the values before detection.
    #[arg(long)]
    pub log_transform: bool,
    #[arg(long, value_enum, default_value_t = BasisChoice::Constant)]
    pub basis: BasisChoice,
    /// Known number of change points (exact dynamic program).
    #[arg(long, conflicts_with = "auto")]
    pub m: Option<usize>,
    /// Objective for the known-m search.
    #[arg(long, value_enum, default_value_t = MethodChoice::Lsse)]
    pub method: MethodChoice,
    /// Estimate the number of change points with this algorithm.
    #[arg(long, value_enum)]
    pub auto: Option<AutoAlgorithm>,
    /// Largest number of change points the neighbourhood search considers.
    #[arg(long, default_value_t = 10)]
    pub mmax: usize,
    /// Information-criterion penalty for --auto sns (AIC for comparison
    /// only; it is not order-consistent).
    #[arg(long, value_enum, default_value_t = PenaltyChoice::Sic)]
    pub penalty: PenaltyChoice,
    /// Minimum regime length as a fraction of the series (default 0.05).
    #[arg(long)]
    pub h_frac: Option<f64>,
    /// Minimum regime length in rows (overrides --h-frac).
    #[arg(long)]
    pub h_abs: Option<usize>,
    /// Diffusion level: 'realized' or an explicit value.
    #[arg(long, value_parser = parse_sigma, default_value = "realized")]
    pub sigma: SigmaSpec,
    /// Result JSON path (prints to stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for SVG plot output.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// Cross-check with the exhaustive oracle instead of the DP (debug).
    #[arg(long, hide = true)]
    pub oracle: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct McRatesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case: u8,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long, value_enum, default_value_t = RateMethodChoice::Both)]
    pub method: RateMethodChoice,
    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
    #[arg(long, default_value_t = 42)]
    pub seed0: u64,
    #[arg(long)]
    pub h_frac: Option<f64>,
    #[arg(long)]
    pub h_abs: Option<usize>,
    /// Output prefix: writes <out>.csv and <out>.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub plots: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct McCountArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case: u8,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long, value_enum)]
    pub algorithm: CountAlgorithmChoice,
    #[arg(long, default_value_t = 5)]
    pub mmax: usize,
    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
    #[arg(long, default_value_t = 42)]
    pub seed0: u64,
    #[arg(long)]
    pub h_frac: Option<f64>,
    #[arg(long)]
    pub h_abs: Option<usize>,
    /// Output prefix: writes <out>.csv and <out>.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub dt: f64,
    #[arg(long, default_value = "t")]
    pub time_col: String,
    #[arg(long, default_value = "x")]
    pub value_col: String,
    #[arg(long)]
    pub log_transform: bool,
    /// A detection-result JSON whose change points are marked.
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}
