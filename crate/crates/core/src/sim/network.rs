//! Explicit street networks in the unit square and geometric search walks on them.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::ModulationLaw;
use crate::model::CityConfig;

use super::segment::{slot_distance, WeightSampler};
use super::{SearchOutcome, TerminalRule};

/// Largest depth a network may be generated for (`2^{25}` streets per orientation).
pub const MAX_NETWORK_DEPTH: u32 = 24;

const FORMAT_TAG: &str = "# hyperpark street network v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Vertical,
    Horizontal,
}

impl Orientation {
    fn as_str(self) -> &'static str {
        match self {
            Orientation::Vertical => "V",
            Orientation::Horizontal => "H",
        }
    }

    fn flip(self) -> Self {
        match self {
            Orientation::Vertical => Orientation::Horizontal,
            Orientation::Horizontal => Orientation::Vertical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Deterministic,
    Poisson,
}

/// Streets of one depth. Vertical streets are indexed by their x coordinate,
/// horizontal streets by their y coordinate; both lists are sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkLevel {
    pub level: u32,
    pub intensity: f64,
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
}

impl NetworkLevel {
    pub fn streets(&self, o: Orientation) -> &[f64] {
        match o {
            Orientation::Vertical => &self.vertical,
            Orientation::Horizontal => &self.horizontal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreetNetwork {
    pub kind: NetworkKind,
    pub levels: Vec<NetworkLevel>,
}

fn check_depth(cfg: &CityConfig<f64>) -> Result<u32> {
    let k = cfg.depth().finite().ok_or(Error::InfiniteDepth)?;
    if k > MAX_NETWORK_DEPTH {
        return Err(Error::NetworkTooDeep(k));
    }
    Ok(k)
}

/// Dyadic construction: the central cross at 1/2, then `2^k` streets per orientation at
/// `(2i+1)/2^{k+1}` for each level `k >= 1`.
pub fn generate_deterministic_network(cfg: &CityConfig<f64>) -> Result<StreetNetwork> {
    let k_max = check_depth(cfg)?;
    let rates = cfg.rates();
    let levels = (0..=k_max)
        .map(|k| {
            let coords: Vec<f64> = if k == 0 {
                vec![0.5]
            } else {
                let denom = (1u64 << (k + 1)) as f64;
                (0..1u64 << k).map(|i| (2 * i + 1) as f64 / denom).collect()
            };
            NetworkLevel { level: k, intensity: rates.lambda_k(k), vertical: coords.clone(), horizontal: coords }
        })
        .collect();
    Ok(StreetNetwork { kind: NetworkKind::Deterministic, levels })
}

/// Disjoint Poisson layers: per level `k` and orientation, `Poisson(2^k)` streets at
/// i.i.d. uniform positions.
pub fn generate_poisson_network<R: Rng + ?Sized>(cfg: &CityConfig<f64>, rng: &mut R) -> Result<StreetNetwork> {
    let k_max = check_depth(cfg)?;
    let rates = cfg.rates();
    let mut levels = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let poisson = Poisson::new((1u64 << k) as f64).map_err(|e| Error::Domain(e.to_string()))?;
        let mut layer = || {
            let n: f64 = poisson.sample(rng);
            let mut v: Vec<f64> = (0..n as usize).map(|_| rng.random::<f64>()).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let vertical = layer();
        let horizontal = layer();
        levels.push(NetworkLevel { level: k, intensity: rates.lambda_k(k), vertical, horizontal });
    }
    Ok(StreetNetwork { kind: NetworkKind::Poisson, levels })
}

impl StreetNetwork {
    pub fn k_max(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn street_count(&self) -> usize {
        self.levels.iter().map(|l| l.vertical.len() + l.horizontal.len()).sum()
    }

    pub fn level_count(&self, k: u32) -> usize {
        self.levels.get(k as usize).map_or(0, |l| l.vertical.len() + l.horizontal.len())
    }

    /// Line format: comment header, then `level orientation coordinate intensity` per street.
    pub fn to_text(&self, config_echo: &str, seed: Option<u64>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_TAG}");
        let kind = match self.kind {
            NetworkKind::Deterministic => "deterministic",
            NetworkKind::Poisson => "poisson",
        };
        let _ = writeln!(out, "# kind: {kind}");
        let _ = writeln!(out, "# config: {config_echo}");
        match seed {
            Some(s) => {
                let _ = writeln!(out, "# seed: {s}");
            }
            None => {
                let _ = writeln!(out, "# seed: none");
            }
        }
        let _ = writeln!(out, "# level orientation coordinate intensity");
        for l in &self.levels {
            for o in [Orientation::Vertical, Orientation::Horizontal] {
                for c in l.streets(o) {
                    let _ = writeln!(out, "{} {} {:?} {:?}", l.level, o.as_str(), c, l.intensity);
                }
            }
        }
        out
    }

    /// Inverse of [`StreetNetwork::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut kind = NetworkKind::Poisson;
        let mut levels: Vec<NetworkLevel> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# kind:") {
                kind = if rest.trim() == "deterministic" { NetworkKind::Deterministic } else { NetworkKind::Poisson };
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse(format!("network line {}: `{line}`", n + 1));
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad());
            }
            let level: u32 = f[0].parse().map_err(|_| bad())?;
            let coord: f64 = f[2].parse().map_err(|_| bad())?;
            let intensity: f64 = f[3].parse().map_err(|_| bad())?;
            while levels.len() <= level as usize {
                let k = levels.len() as u32;
                levels.push(NetworkLevel { level: k, intensity: 0.0, vertical: vec![], horizontal: vec![] });
            }
            let l = &mut levels[level as usize];
            l.intensity = intensity;
            match f[1] {
                "V" => l.vertical.push(coord),
                "H" => l.horizontal.push(coord),
                _ => return Err(bad()),
            }
        }
        if levels.is_empty() {
            return Err(Error::Parse("network has no streets".into()));
        }
        for l in &mut levels {
            l.vertical.sort_by(f64::total_cmp);
            l.horizontal.sort_by(f64::total_cmp);
        }
        Ok(Self { kind, levels })
    }
}

/// Position on a street: the walk heads East on horizontal streets and South on vertical ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StartPoint {
    pub x: f64,
    pub y: f64,
    pub orientation: Orientation,
    pub level: u32,
}

/// Uniform point on a uniformly chosen deepest-level street (horizontal if any exist).
pub fn random_start<R: Rng + ?Sized>(network: &StreetNetwork, rng: &mut R) -> Option<StartPoint> {
    let top = network.levels.last()?;
    let pos: f64 = rng.random();
    let (orientation, streets) = if !top.horizontal.is_empty() {
        (Orientation::Horizontal, &top.horizontal)
    } else if !top.vertical.is_empty() {
        (Orientation::Vertical, &top.vertical)
    } else {
        return None;
    };
    let c = streets[rng.random_range(0..streets.len())];
    let (x, y) = match orientation {
        Orientation::Horizontal => (pos, c),
        Orientation::Vertical => (c, pos),
    };
    Some(StartPoint { x, y, orientation, level: top.level })
}

/// Which streets the walk may turn onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkRule {
    /// The first street of exactly one level lower.
    #[default]
    Jumpless,
    /// The first street of any lower level.
    JumpOver,
}

/// Non-backtracking East/South search on an explicit network.
///
/// Slots on the current street are a Poisson process of the street's intensity (times a
/// per-level weight when `law` is given). Leaving the unit square ends the walk unparked
/// with `exited` set.
pub fn simulate_on_network<R: Rng + ?Sized>(
    network: &StreetNetwork,
    start: StartPoint,
    rule: WalkRule,
    terminal: TerminalRule,
    law: Option<&ModulationLaw>,
    rng: &mut R,
) -> Result<SearchOutcome> {
    let weights = WeightSampler::new(law)?;
    walk(network, start, rule, terminal, &weights, rng)
}

pub(crate) fn walk<R: Rng + ?Sized>(
    network: &StreetNetwork,
    start: StartPoint,
    rule: WalkRule,
    terminal: TerminalRule,
    weights: &WeightSampler,
    rng: &mut R,
) -> Result<SearchOutcome> {
    if start.level as usize >= network.levels.len() {
        return Err(Error::Domain(format!("start level {} exceeds the network depth", start.level)));
    }
    let (mut x, mut y, mut o, mut k) = (start.x, start.y, start.orientation, start.level);
    let mut out = SearchOutcome::start(k);
    // distance to the square's edge in the direction of travel
    let edge = |o: Orientation, x: f64, y: f64| match o {
        Orientation::Horizontal => 1.0 - x,
        Orientation::Vertical => y,
    };
    loop {
        let rate = network.levels[k as usize].intensity * weights.draw(rng);
        if k == 0 {
            if terminal == TerminalRule::Persist {
                let slot = slot_distance(rate, rng);
                let room = edge(o, x, y);
                if slot <= room {
                    out.distance += slot;
                    out.parked = true;
                } else if rate > 0.0 {
                    out.distance += room;
                    out.exited = true;
                }
            }
            return Ok(out);
        }
        let targets = match rule {
            WalkRule::Jumpless => k - 1..k,
            WalkRule::JumpOver => 0..k,
        };
        let cross = o.flip();
        let mut best: Option<(f64, u32, f64)> = None;
        for j in targets {
            let streets = network.levels[j as usize].streets(cross);
            let hit = match o {
                Orientation::Horizontal => {
                    let i = streets.partition_point(|&c| c <= x);
                    streets.get(i).map(|&c| (c - x, c))
                }
                Orientation::Vertical => {
                    let i = streets.partition_point(|&c| c < y);
                    (i > 0).then(|| (y - streets[i - 1], streets[i - 1]))
                }
            };
            if let Some((gap, c)) = hit {
                if best.is_none_or(|b| gap < b.0) {
                    best = Some((gap, j, c));
                }
            }
        }
        let room = best.map_or(edge(o, x, y), |b| b.0);
        let slot = slot_distance(rate, rng);
        if slot <= room {
            out.distance += slot;
            out.parked = true;
            return Ok(out);
        }
        out.distance += room;
        let Some((_, level, coord)) = best else {
            out.exited = true;
            return Ok(out);
        };
        match o {
            Orientation::Horizontal => x = coord,
            Orientation::Vertical => y = coord,
        }
        o = cross;
        k = level;
        out.turn_to(k);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Depth;
    use crate::sim::RngStream;

    fn cfg(lambda: f64, k: u32) -> CityConfig<f64> {
        CityConfig::unit(0.5, lambda, Depth::Finite(k)).unwrap()
    }

    #[test]
    fn deterministic_counts() {
        assert_eq!(generate_deterministic_network(&cfg(1.0, 0)).unwrap().street_count(), 2);
        let net = generate_deterministic_network(&cfg(1.0, 2)).unwrap();
        assert_eq!(net.street_count(), 14);
        for k in 1..=2 {
            assert_eq!(net.level_count(k) as u64, crate::model::street_count(k));
        }
        assert_eq!(net.levels[2].vertical, vec![0.125, 0.375, 0.625, 0.875]);
        assert!(net.levels.windows(2).all(|w| w[1].intensity < w[0].intensity));
    }

    #[test]
    fn depth_guards() {
        assert_eq!(generate_deterministic_network(&cfg(1.0, 25)), Err(Error::NetworkTooDeep(25)));
        let inf = CityConfig::unit(0.5, 1.0, Depth::Infinite).unwrap();
        assert_eq!(generate_deterministic_network(&inf), Err(Error::InfiniteDepth));
    }

    #[test]
    fn walk_without_slots_reaches_cross() {
        let net = generate_deterministic_network(&cfg(0.0, 2)).unwrap();
        let start = StartPoint { x: 0.1, y: 0.875, orientation: Orientation::Horizontal, level: 2 };
        let mut rng = RngStream::new(0, 0).rng();
        let o = simulate_on_network(&net, start, WalkRule::Jumpless, TerminalRule::Formula, None, &mut rng).unwrap();
        assert!(!o.parked && !o.exited);
        assert_eq!(o.turns, 2);
        assert_eq!(o.level_trace, vec![2, 1, 0]);
        assert!((o.distance - (0.15 + 0.375)).abs() < 1e-15);
    }

    #[test]
    fn walk_exits_square() {
        let net = generate_deterministic_network(&cfg(0.0, 2)).unwrap();
        let start = StartPoint { x: 0.8, y: 0.875, orientation: Orientation::Horizontal, level: 2 };
        let mut rng = RngStream::new(0, 0).rng();
        let o = simulate_on_network(&net, start, WalkRule::Jumpless, TerminalRule::Formula, None, &mut rng).unwrap();
        assert!(o.exited && !o.parked);
        assert!((o.distance - 0.2).abs() < 1e-15);
    }

    #[test]
    fn jumpover_takes_nearest_lower_street() {
        let net = generate_deterministic_network(&cfg(0.0, 2)).unwrap();
        let start = StartPoint { x: 0.3, y: 0.875, orientation: Orientation::Horizontal, level: 2 };
        let mut rng = RngStream::new(0, 0).rng();
        let o = simulate_on_network(&net, start, WalkRule::JumpOver, TerminalRule::Formula, None, &mut rng).unwrap();
        // East from 0.3: level 0 at 0.5 comes before level 1 at 0.75
        assert_eq!(o.level_trace, vec![2, 0]);
        assert!((o.distance - 0.2).abs() < 1e-15);
    }

    #[test]
    fn poisson_network_is_reproducible_and_round_trips() {
        let c = cfg(10.0, 6);
        let a = generate_poisson_network(&c, &mut RngStream::new(5, 1).rng()).unwrap();
        let b = generate_poisson_network(&c, &mut RngStream::new(5, 1).rng()).unwrap();
        assert_eq!(a.to_text("p=0.5", Some(5)), b.to_text("p=0.5", Some(5)));
        let parsed = StreetNetwork::from_text(&a.to_text("p=0.5", Some(5))).unwrap();
        for (l, m) in a.levels.iter().zip(&parsed.levels) {
            assert_eq!(l.vertical, m.vertical);
            assert_eq!(l.horizontal, m.horizontal);
        }
    }
}
