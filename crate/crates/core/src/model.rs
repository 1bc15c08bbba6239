//! Binary hyperfractal city parameters and the quantities derived from them.
//!
//! Depth `k` streets carry the linear mass density `mu_k = (p/2)(q/2)^k`;
//! level 0 is the central cross (two streets), level `k >= 1` adds `2^k`
//! vertical and `2^k` horizontal streets. A street of depth `k` releases
//! parking slots at rate `lambda_k = mu_k * lambda` and, along a search
//! path, is followed for a mean length of `L / 2^k` before the next turn.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Default truncation tolerance for infinite sums and products.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Maximum street depth `k_max`; `Infinite` is handled by adaptive truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Depth {
    Finite(u32),
    Infinite,
}

impl Depth {
    pub fn finite(self) -> Option<u32> {
        match self {
            Depth::Finite(k) => Some(k),
            Depth::Infinite => None,
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(k) => write!(f, "{k}"),
            Depth::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "Infinite" | "∞" => Ok(Depth::Infinite),
            t => t
                .parse::<u32>()
                .map(Depth::Finite)
                .map_err(|_| Error::Parse(format!("k_max must be a nonnegative integer or `inf`, got `{t}`"))),
        }
    }
}

/// Immutable parameter set of the binary hyperfractal model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityConfig<T> {
    p: T,
    q: T,
    alpha: T,
    length: T,
    lambda: T,
    depth: Depth,
    eps: T,
}

impl<T: Scalar> CityConfig<T> {
    /// `p` in (0,1), street length scale `L > 0`, total pop-up intensity `lambda >= 0`.
    pub fn new(p: T, length: T, lambda: T, depth: Depth) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(domain(format!("p must lie in (0,1), got {p}")));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(domain(format!("L must be positive and finite, got {length}")));
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(domain(format!("lambda must be nonnegative and finite, got {lambda}")));
        }
        let q = T::one() - p;
        Ok(Self { p, q, alpha: q / T::lit(4.0), length, lambda, depth, eps: T::lit(DEFAULT_EPS) })
    }

    /// Unit-square model (`L = 1`).
    pub fn unit(p: T, lambda: T, depth: Depth) -> Result<Self> {
        Self::new(p, T::one(), lambda, depth)
    }

    pub fn with_lambda(self, lambda: T) -> Result<Self> {
        Self::new(self.p, self.length, lambda, self.depth).map(|c| Self { eps: self.eps, ..c })
    }

    pub fn with_depth(self, depth: Depth) -> Self {
        Self { depth, ..self }
    }

    pub fn with_eps(self, eps: T) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::Tolerance(eps.as_f64()));
        }
        Ok(Self { eps, ..self })
    }

    pub fn p(&self) -> T {
        self.p
    }
    pub fn q(&self) -> T {
        self.q
    }
    /// Contraction ratio `q / 4`.
    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn length(&self) -> T {
        self.length
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn depth(&self) -> Depth {
        self.depth
    }
    pub fn eps(&self) -> T {
        self.eps
    }

    /// `d_F = log(4/q) / log 2`.
    pub fn dimension(&self) -> T {
        (T::lit(4.0) / self.q).ln() / T::LN_2()
    }

    pub fn level_density(&self, k: u32) -> T {
        level_density(self, k)
    }

    /// `rho = lambda L p / 2`, the expected pop-up count on a level-0 segment.
    pub fn rho(&self) -> T {
        self.lambda * self.length * self.p / T::lit(2.0)
    }

    /// Argument of the harmonic sum `f`: `x = lambda L p / (2 alpha)`.
    pub fn scaled_intensity(&self) -> T {
        self.rho() / self.alpha
    }

    pub fn rates(&self) -> DerivedRates<T> {
        DerivedRates { p: self.p, q: self.q, length: self.length, lambda: self.lambda }
    }

    /// `sum_{k <= up_to} street_count(k) * mu_k`, which tends to 1.
    pub fn mass_closure(&self, up_to: u32) -> T {
        (0..=up_to).map(|k| T::lit(street_count(k) as f64) * self.level_density(k)).fold(T::zero(), |a, b| a + b)
    }
}

/// Number of streets at depth `k` in the deterministic construction.
pub fn street_count(k: u32) -> u64 {
    if k == 0 {
        2
    } else {
        1u64 << (k + 1).min(63)
    }
}

/// `d_F = log(4/q)/log 2` for `q` in (0, 1].
pub fn hyperfractal_dimension<T: Scalar>(q: T) -> Result<T> {
    if !(q > T::zero() && q <= T::one()) {
        return Err(domain(format!("q must lie in (0,1], got {q}")));
    }
    Ok((T::lit(4.0) / q).ln() / T::LN_2())
}

/// Length contraction `s` and mass contraction `r` of a generalized self-similar construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedScaling<T> {
    pub s: T,
    pub r: T,
}

/// `d_F = log r / log s`.
pub fn generalized_dimension<T: Scalar>(g: &GeneralizedScaling<T>) -> Result<T> {
    let unit = |v: T| v > T::zero() && v < T::one();
    if !unit(g.s) || !unit(g.r) {
        return Err(domain(format!("s and r must lie in (0,1), got s={} r={}", g.s, g.r)));
    }
    Ok(g.r.ln() / g.s.ln())
}

/// `mu_k = (p/2)(q/2)^k`.
pub fn level_density<T: Scalar>(cfg: &CityConfig<T>, k: u32) -> T {
    let half = T::lit(0.5);
    cfg.p * half * (cfg.q * half).powi(k as i32)
}

/// Per-level rates of the search model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates<T> {
    p: T,
    q: T,
    length: T,
    lambda: T,
}

impl<T: Scalar> DerivedRates<T> {
    /// Pop-up intensity `mu_k * lambda` on a depth-`k` street.
    pub fn lambda_k(&self, k: u32) -> T {
        let half = T::lit(0.5);
        self.lambda * self.p * half * (self.q * half).powi(k as i32)
    }

    /// Mean segment length `L / 2^k`.
    pub fn mean_segment_length(&self, k: u32) -> T {
        self.length * T::lit(0.5).powi(k as i32)
    }

    /// Reciprocal of the mean segment length.
    pub fn segment_rate(&self, k: u32) -> T {
        T::one() / self.mean_segment_length(k)
    }

    /// Expected pop-ups per segment, `lambda L (p/2) (q/4)^k`.
    pub fn expected_popups(&self, k: u32) -> T {
        self.lambda * self.length * self.p * T::lit(0.5) * (self.q * T::lit(0.25)).powi(k as i32)
    }
}
