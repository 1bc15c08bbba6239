//! Event-level Monte Carlo of the parking search.

mod monte_carlo;
pub mod network;
mod segment;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use monte_carlo::{monte_carlo, monte_carlo_outcomes, write_outcomes_csv, McSummary, Scenario, OUTCOME_CSV_HEADER};
pub use network::{
    generate_deterministic_network, generate_poisson_network, random_start, simulate_on_network, NetworkKind,
    NetworkLevel, Orientation, StartPoint, StreetNetwork, WalkRule, MAX_NETWORK_DEPTH,
};
pub use segment::{simulate_jumpless, simulate_jumpover, simulate_modulated, simulate_segment_model};

/// Turn rule of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Next street is exactly one level lower.
    Jumpless,
    /// Next level drops by `j >= 1` with probability `2^{-j}`, clamped at level 0.
    JumpOver,
    /// Jumpless walk on a freshly generated Poisson street network per replication.
    Network,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Jumpless => "jumpless",
            Strategy::JumpOver => "jumpover",
            Strategy::Network => "network",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "jumpless" => Ok(Strategy::Jumpless),
            "jumpover" | "jump-over" => Ok(Strategy::JumpOver),
            "network" => Ok(Strategy::Network),
            other => Err(Error::Parse(format!("unknown strategy `{other}`"))),
        }
    }
}

/// What happens when the search reaches the central cross without parking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalRule {
    /// Stop unparked; the distance is everything driven so far. Matches the closed forms.
    #[default]
    Formula,
    /// Keep driving on the cross until a slot appears.
    Persist,
}

impl fmt::Display for TerminalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalRule::Formula => "formula",
            TerminalRule::Persist => "persist",
        })
    }
}

impl FromStr for TerminalRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "formula" => Ok(TerminalRule::Formula),
            "persist" => Ok(TerminalRule::Persist),
            other => Err(Error::Parse(format!("unknown terminal rule `{other}`"))),
        }
    }
}

/// One simulated search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub distance: f64,
    pub turns: u32,
    pub parked: bool,
    /// The walk left the unit square (network walks only).
    pub exited: bool,
    /// Levels visited in order, starting with the initial level.
    pub level_trace: Vec<u32>,
}

impl SearchOutcome {
    fn start(level: u32) -> Self {
        Self { distance: 0.0, turns: 0, parked: false, exited: false, level_trace: vec![level] }
    }

    fn turn_to(&mut self, level: u32) {
        self.turns += 1;
        self.level_trace.push(level);
    }
}

/// Independent random stream for replication `stream_id` under `master_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}
