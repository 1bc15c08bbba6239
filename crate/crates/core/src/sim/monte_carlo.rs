use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::ModulationLaw;
use crate::model::CityConfig;
use crate::scalar::CompensatedSum;

use super::network::{generate_poisson_network, random_start, walk, WalkRule};
use super::segment::{run_segment, WeightSampler};
use super::{RngStream, SearchOutcome, Strategy, TerminalRule};

/// Column header of outcome dumps.
pub const OUTCOME_CSV_HEADER: &str = "rep,distance,turns,parked,levels_visited";

/// Replications per parallel work unit. Fixed so results do not depend on the thread count.
const CHUNK: u64 = 1 << 16;

/// Everything a replication needs besides its random stream.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub city: CityConfig<f64>,
    pub strategy: Strategy,
    pub law: Option<ModulationLaw>,
    pub terminal: TerminalRule,
    sampler: WeightSampler,
    k_max: u32,
}

impl Scenario {
    pub fn new(
        city: CityConfig<f64>,
        strategy: Strategy,
        law: Option<ModulationLaw>,
        terminal: TerminalRule,
    ) -> Result<Self> {
        let k_max = city.depth().finite().ok_or(Error::InfiniteDepth)?;
        if strategy == Strategy::Network && k_max > super::MAX_NETWORK_DEPTH {
            return Err(Error::NetworkTooDeep(k_max));
        }
        let sampler = WeightSampler::new(law.as_ref())?;
        Ok(Self { city, strategy, law, terminal, sampler, k_max })
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Replication `rep` under `seed`; a pure function of its arguments.
    pub fn run_replication(&self, seed: u64, rep: u64) -> Result<SearchOutcome> {
        let mut rng = RngStream::new(seed, rep).rng();
        match self.strategy {
            Strategy::Jumpless => run_segment(&self.city, false, &self.sampler, self.terminal, &mut rng),
            Strategy::JumpOver => run_segment(&self.city, true, &self.sampler, self.terminal, &mut rng),
            Strategy::Network => {
                let net = generate_poisson_network(&self.city, &mut rng)?;
                match random_start(&net, &mut rng) {
                    Some(start) => walk(&net, start, WalkRule::Jumpless, self.terminal, &self.sampler, &mut rng),
                    // no street at the top level: nothing to search
                    None => Ok(SearchOutcome::start(self.k_max)),
                }
            }
        }
    }
}

/// Aggregate of `reps` replications. Standard errors come from sample moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub reps: u64,
    pub k_max: u32,
    pub mean: f64,
    pub se_mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub se_variance: f64,
    pub second_moment: f64,
    pub se_second: f64,
    pub parked_fraction: f64,
    pub exited_fraction: f64,
    /// Mean of `k_max - turns`.
    pub deficit_mean: f64,
    pub deficit_se: f64,
    /// `deficit_histogram[d]` counts replications with `k_max - turns = d`.
    pub deficit_histogram: Vec<u64>,
}

/// All outcomes of replications `0..reps`, in replication order.
pub fn monte_carlo_outcomes(scenario: &Scenario, reps: u64, seed: u64) -> Result<Vec<SearchOutcome>> {
    let chunks: Vec<u64> = (0..reps.div_ceil(CHUNK)).collect();
    let parts: Vec<Vec<SearchOutcome>> = chunks
        .par_iter()
        .map(|&c| {
            let end = ((c + 1) * CHUNK).min(reps);
            (c * CHUNK..end).map(|rep| scenario.run_replication(seed, rep)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Runs `reps >= 1` replications in parallel and aggregates them in replication order.
pub fn monte_carlo(scenario: &Scenario, reps: u64, seed: u64) -> Result<McSummary> {
    if reps == 0 {
        return Err(Error::Domain("monte_carlo needs reps >= 1".into()));
    }
    let outcomes = monte_carlo_outcomes(scenario, reps, seed)?;
    Ok(McSummary::from_outcomes(&outcomes, scenario.k_max))
}

fn mean_of(values: impl Iterator<Item = f64>, n: f64) -> f64 {
    values.collect::<CompensatedSum<f64>>().value() / n
}

/// Mean, unbiased variance, and the standard errors of both.
fn moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mean = mean_of(x.iter().copied(), n);
    if x.len() < 2 {
        return (mean, 0.0, 0.0, 0.0);
    }
    let m2 = mean_of(x.iter().map(|v| (v - mean).powi(2)), n);
    let var = m2 * n / (n - 1.0);
    let se_mean = (var / n).sqrt();
    let se_var = if x.len() < 4 {
        0.0
    } else {
        let m4 = mean_of(x.iter().map(|v| (v - mean).powi(4)), n);
        ((m4 - (n - 3.0) / (n - 1.0) * m2 * m2).max(0.0) / n).sqrt()
    };
    (mean, var, se_mean, se_var)
}

impl McSummary {
    /// Aggregates outcomes in the given order. `outcomes` must be nonempty.
    pub fn from_outcomes(outcomes: &[SearchOutcome], k_max: u32) -> Self {
        let n = outcomes.len() as f64;
        let d: Vec<f64> = outcomes.iter().map(|o| o.distance).collect();
        let (mean, variance, se_mean, se_variance) = moments(&d);
        let sq: Vec<f64> = d.iter().map(|v| v * v).collect();
        let (second_moment, _, se_second, _) = moments(&sq);
        let deficits: Vec<f64> = outcomes.iter().map(|o| k_max.saturating_sub(o.turns) as f64).collect();
        let (deficit_mean, _, deficit_se, _) = moments(&deficits);
        let mut deficit_histogram = vec![0u64; k_max as usize + 1];
        for o in outcomes {
            deficit_histogram[k_max.saturating_sub(o.turns) as usize] += 1;
        }
        McSummary {
            reps: outcomes.len() as u64,
            k_max,
            mean,
            se_mean,
            variance,
            se_variance,
            second_moment,
            se_second,
            parked_fraction: outcomes.iter().filter(|o| o.parked).count() as f64 / n,
            exited_fraction: outcomes.iter().filter(|o| o.exited).count() as f64 / n,
            deficit_mean,
            deficit_se,
            deficit_histogram,
        }
    }
}

/// Writes [`OUTCOME_CSV_HEADER`] and one row per outcome; levels are `;`-separated.
pub fn write_outcomes_csv<W: Write>(mut out: W, outcomes: &[SearchOutcome]) -> io::Result<()> {
    writeln!(out, "{OUTCOME_CSV_HEADER}")?;
    for (rep, o) in outcomes.iter().enumerate() {
        let levels: Vec<String> = o.level_trace.iter().map(u32::to_string).collect();
        writeln!(out, "{rep},{:?},{},{},{}", o.distance, o.turns, u8::from(o.parked), levels.join(";"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Depth;

    fn scenario(strategy: Strategy) -> Scenario {
        let cfg = CityConfig::unit(0.5, 100.0, Depth::Finite(12)).unwrap();
        Scenario::new(cfg, strategy, None, TerminalRule::Formula).unwrap()
    }

    #[test]
    fn single_rep_summary_is_the_outcome() {
        let s = scenario(Strategy::Jumpless);
        let o = s.run_replication(4, 0).unwrap();
        let m = monte_carlo(&s, 1, 4).unwrap();
        assert_eq!(m.mean, o.distance);
        assert_eq!(m.variance, 0.0);
        assert_eq!(m.se_mean, 0.0);
        assert_eq!(m.deficit_mean, (12 - o.turns) as f64);
        assert_eq!(m.deficit_histogram.iter().sum::<u64>(), 1);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = scenario(Strategy::JumpOver);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| monte_carlo(&s, 150_000, 8)).unwrap();
        let b = four.install(|| monte_carlo(&s, 150_000, 8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn network_strategy_runs() {
        let s = scenario(Strategy::Network);
        let m = monte_carlo(&s, 200, 1).unwrap();
        assert!(m.mean > 0.0 && m.mean < 2.0, "{m:?}");
        assert!(m.deficit_histogram.iter().sum::<u64>() == 200);
    }

    #[test]
    fn csv_rows() {
        let o = SearchOutcome { distance: 0.25, turns: 2, parked: false, exited: false, level_trace: vec![2, 1, 0] };
        let mut buf = Vec::new();
        write_outcomes_csv(&mut buf, &[o]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "rep,distance,turns,parked,levels_visited\n0,0.25,2,0,2;1;0\n");
    }

    #[test]
    fn zero_reps_rejected() {
        assert!(monte_carlo(&scenario(Strategy::Jumpless), 0, 0).is_err());
    }
}
