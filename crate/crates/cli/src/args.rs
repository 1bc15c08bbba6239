use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperpark::experiments::{Grid, Preset, Suite};
use hyperpark::sim::NetworkKind;
use hyperpark::{Depth, ModulationLaw, Strategy, TerminalRule};

#[derive(Debug, Parser)]
#[command(name = "hyperpark", version, about = "Parking search on hyperfractal street networks")]
pub struct Cli {
    /// TOML file with defaults for p, L, lambda, k_max, seed, strategy, modulation, beta, theta.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Master seed (default: $HYPERPARK_SEED, then 20261015).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate closed forms on a lambda value or grid.
    Analytic(AnalyticArgs),
    /// Monte Carlo replications with an outcome CSV and a summary line.
    Simulate(SimulateArgs),
    /// Run verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// One period of the log-periodic fluctuation of the mean.
    Profile(ProfileArgs),
    /// Generate a street network in the line format.
    Network(NetworkArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub p: Option<f64>,
    /// Length scale.
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Geometric grid `start:ratio:count`.
    #[arg(long = "lambda-grid", conflicts_with = "lambda")]
    pub lambda_grid: Option<GridSpec>,
    /// Maximum depth, an integer or `inf`.
    #[arg(long)]
    pub kmax: Option<Depth>,
    /// `none`, `constant:w`, `gamma:shape:scale` or `lognormal:mu:sigma`.
    #[arg(long)]
    pub modulation: Option<LawSpec>,
    /// Truncation tolerance of infinite sums.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Mean,
    Variance,
    TurnsMean,
    #[value(name = "g")]
    SmallG,
    #[value(name = "G")]
    BigG,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "mean")]
    pub quantity: Quantity,
    /// Argument of `g` and `G`.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value = "formula")]
    pub terminal: TerminalRule,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the manifest and summary only.
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value = "small")]
    pub preset: Preset,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub kmax: Option<Depth>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "L")]
    pub length: Option<f64>,
    /// Start of the period in the scaled intensity `x`.
    #[arg(long, default_value_t = 1e6)]
    pub x0: f64,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Deterministic,
    Poisson,
}

impl From<KindArg> for NetworkKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Deterministic => NetworkKind::Deterministic,
            KindArg::Poisson => NetworkKind::Poisson,
        }
    }
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "poisson")]
    pub kind: KindArg,
}

/// `start:ratio:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec(pub Grid);

impl FromStr for GridSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, r, n] = parts.as_slice() else {
            return Err(format!("expected start:ratio:count, got `{s}`"));
        };
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let count = n.parse::<usize>().map_err(|e| format!("`{n}`: {e}"))?;
        Grid::new(num(a)?, num(r)?, count).map(GridSpec).map_err(|e| e.to_string())
    }
}

/// A modulation law or `none`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawSpec(pub Option<ModulationLaw>);

impl FromStr for LawSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "none" {
            return Ok(LawSpec(None));
        }
        s.parse::<ModulationLaw>().map(|l| LawSpec(Some(l))).map_err(|e| e.to_string())
    }
}
