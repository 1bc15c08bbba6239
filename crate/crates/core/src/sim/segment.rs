use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, LogNormal};

use crate::error::{Error, Result};
use crate::harmonic::ModulationLaw;
use crate::model::CityConfig;

use super::{SearchOutcome, Strategy, TerminalRule};

/// Sampler for the per-level weight `W`; constant weights consume no randomness.
#[derive(Debug, Clone, Copy)]
pub(crate) enum WeightSampler {
    Fixed(f64),
    Gamma(Gamma<f64>),
    LogNormal(LogNormal<f64>),
}

impl WeightSampler {
    pub(crate) fn new(law: Option<&ModulationLaw>) -> Result<Self> {
        let bad = |e: &dyn std::fmt::Display| Error::Domain(format!("modulation law: {e}"));
        Ok(match law {
            None => Self::Fixed(1.0),
            Some(ModulationLaw::Constant { w }) => Self::Fixed(*w),
            Some(ModulationLaw::Gamma { shape, scale }) => {
                Self::Gamma(Gamma::new(*shape, *scale).map_err(|e| bad(&e))?)
            }
            Some(ModulationLaw::LogNormal { mu, sigma }) => {
                Self::LogNormal(LogNormal::new(*mu, *sigma).map_err(|e| bad(&e))?)
            }
        })
    }

    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Fixed(w) => *w,
            Self::Gamma(g) => g.sample(rng),
            Self::LogNormal(l) => l.sample(rng),
        }
    }
}

/// Distance to the first slot on a street with intensity `rate`; infinite when `rate = 0`.
#[inline]
pub(crate) fn slot_distance<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    if rate > 0.0 {
        e / rate
    } else {
        f64::INFINITY
    }
}

#[inline]
fn jump_size<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    // P(j) = 2^{-j}, j >= 1
    1 + rng.random::<u64>().trailing_zeros()
}

/// Segment-model search with exponential segment lengths of mean `L/2^k` at depth `k`.
///
/// Per level: draw `W` (unless constant), the segment length, then the first-slot
/// distance. The draw order is fixed so that a constant unit weight reproduces the
/// unmodulated run bit for bit.
pub(crate) fn run_segment<R: Rng + ?Sized>(
    cfg: &CityConfig<f64>,
    jump: bool,
    weights: &WeightSampler,
    terminal: TerminalRule,
    rng: &mut R,
) -> Result<SearchOutcome> {
    let k_max = cfg.depth().finite().ok_or(Error::InfiniteDepth)?;
    let rates = cfg.rates();
    let mut out = SearchOutcome::start(k_max);
    let mut k = k_max;
    while k > 0 {
        let rate = rates.lambda_k(k) * weights.draw(rng);
        let seg: f64 = Exp1.sample(rng);
        let seg = seg * rates.mean_segment_length(k);
        let slot = slot_distance(rate, rng);
        if slot <= seg {
            out.distance += slot;
            out.parked = true;
            return Ok(out);
        }
        out.distance += seg;
        k = if jump { k.saturating_sub(jump_size(rng)) } else { k - 1 };
        out.turn_to(k);
    }
    if terminal == TerminalRule::Persist {
        let rate = rates.lambda_k(0) * weights.draw(rng);
        let slot = slot_distance(rate, rng);
        if slot.is_finite() {
            out.distance += slot;
            out.parked = true;
        }
    }
    Ok(out)
}

/// Generic entry point for the segment model.
pub fn simulate_segment_model<R: Rng + ?Sized>(
    cfg: &CityConfig<f64>,
    strategy: Strategy,
    law: Option<&ModulationLaw>,
    terminal: TerminalRule,
    rng: &mut R,
) -> Result<SearchOutcome> {
    let jump = match strategy {
        Strategy::Jumpless => false,
        Strategy::JumpOver => true,
        Strategy::Network => return Err(Error::Domain("the segment model has no network strategy".into())),
    };
    run_segment(cfg, jump, &WeightSampler::new(law)?, terminal, rng)
}

/// Jumpless search, stopping unparked at the central cross.
pub fn simulate_jumpless<R: Rng + ?Sized>(cfg: &CityConfig<f64>, rng: &mut R) -> Result<SearchOutcome> {
    run_segment(cfg, false, &WeightSampler::Fixed(1.0), TerminalRule::Formula, rng)
}

/// Jump-over search: from depth `k` the next depth is `k - j` with `P(j) = 2^{-j}`; jumps past
/// the cross land on it, so depth 0 receives the remaining mass `2^{1-k}`.
pub fn simulate_jumpover<R: Rng + ?Sized>(cfg: &CityConfig<f64>, rng: &mut R) -> Result<SearchOutcome> {
    run_segment(cfg, true, &WeightSampler::Fixed(1.0), TerminalRule::Formula, rng)
}

/// Jumpless search with a fresh weight `W_k` per level scaling that level's intensity.
pub fn simulate_modulated<R: Rng + ?Sized>(
    cfg: &CityConfig<f64>,
    law: &ModulationLaw,
    rng: &mut R,
) -> Result<SearchOutcome> {
    run_segment(cfg, false, &WeightSampler::new(Some(law))?, TerminalRule::Formula, rng)
}
