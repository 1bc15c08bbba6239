//! Scaling-law fits and the verification suites that compare formulas, Mellin constants
//! and simulation.

mod fit;
mod report;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::ModulationLaw;
use crate::model::{CityConfig, Depth};

pub use fit::{fit_scaling_exponent, ExponentFit, Grid};
pub use report::{Check, Comparison, Report};
pub use verify::{
    gamma_log_g_limit, pgf_mean_deficit, verify_jumpover, verify_mean_theorem, verify_modulation_theorem,
    verify_turns_theorem, verify_variance, ANALYTIC_SLOPE_TOL, MC_SLOPE_TOL, SE_FACTOR, TURN_BAND,
};

/// Grid and Monte Carlo budget of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plan {
    pub grid: Grid,
    pub reps: u64,
    pub seed: u64,
}

/// Default anchor of verification grids.
pub const GRID_ANCHOR: f64 = 1e3;
/// Default number of grid points.
pub const GRID_POINTS: usize = 9;
/// Depth used by verification runs.
pub const VERIFY_DEPTH: u32 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Small,
    Medium,
    Large,
}

impl Preset {
    pub fn reps(self) -> u64 {
        match self {
            Preset::Small => 20_000,
            Preset::Medium => 100_000,
            Preset::Large => 1_000_000,
        }
    }

    /// Period-aligned grid for the configuration's `alpha`.
    pub fn plan(self, cfg: &CityConfig<f64>, seed: u64) -> Result<Plan> {
        Ok(Plan { grid: Grid::period_aligned(GRID_ANCHOR, cfg.alpha(), GRID_POINTS)?, reps: self.reps(), seed })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Small => "small",
            Preset::Medium => "medium",
            Preset::Large => "large",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "small" => Ok(Preset::Small),
            "medium" => Ok(Preset::Medium),
            "large" => Ok(Preset::Large),
            other => Err(Error::Parse(format!("unknown preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Mean,
    Variance,
    Turns,
    JumpOver,
    Modulation,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Mean, Suite::Variance, Suite::Turns, Suite::JumpOver, Suite::Modulation],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mean" => Ok(Suite::Mean),
            "variance" => Ok(Suite::Variance),
            "turns" => Ok(Suite::Turns),
            "jumpover" | "jump-over" => Ok(Suite::JumpOver),
            "modulation" => Ok(Suite::Modulation),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite `{other}`"))),
        }
    }
}

/// Constant, gamma(0.5) and gamma(2) weights, all with unit mean.
pub fn default_laws() -> Vec<ModulationLaw> {
    vec![
        ModulationLaw::Constant { w: 1.0 },
        ModulationLaw::Gamma { shape: 0.5, scale: 2.0 },
        ModulationLaw::Gamma { shape: 2.0, scale: 0.5 },
    ]
}

/// `p = 1/2`, `L = 1`, depth [`VERIFY_DEPTH`].
pub fn default_city() -> CityConfig<f64> {
    CityConfig::unit(0.5, 1.0, Depth::Finite(VERIFY_DEPTH)).expect("valid default configuration")
}

/// Runs one suite (or all of them) in a fixed order.
pub fn run_suite(suite: Suite, cfg: &CityConfig<f64>, laws: &[ModulationLaw], plan: &Plan) -> Result<Vec<Report>> {
    suite
        .expand()
        .into_iter()
        .map(|s| match s {
            Suite::Mean => verify_mean_theorem(cfg, plan),
            Suite::Variance => verify_variance(cfg, plan),
            Suite::Turns => verify_turns_theorem(cfg, plan),
            Suite::JumpOver => verify_jumpover(cfg, plan),
            Suite::Modulation => verify_modulation_theorem(cfg, laws, plan),
            Suite::All => unreachable!("expanded above"),
        })
        .collect()
}

/// Master seed of sub-run `index` with purpose `tag` (splitmix64 finalizer).
pub fn stream_seed(seed: u64, tag: u64, index: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
