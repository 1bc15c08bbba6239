//! Random per-street modulation of the pop-up intensity.
//!
//! Each level's intensity is multiplied by an independent weight `W`. Averaging over `W`
//! replaces every factor `1/(1+u)` of the search product by `G(u) = E[1/(1+uW)]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{CityConfig, Depth};
use crate::quadrature::{gauss_kronrod, Tolerance};
use crate::scalar::ln_gamma;

use super::hyperfractal::{check_eps, harmonic_sum_with, truncation_for, HarmonicEval};

/// Relative accuracy guaranteed by [`modulated_G`].
pub const G_RELATIVE_ERROR: f64 = 1e-10;

/// Law of the positive weight `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModulationLaw {
    Constant { w: f64 },
    Gamma { shape: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl ModulationLaw {
    pub fn constant(w: f64) -> Result<Self> {
        Self::Constant { w }.validated()
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::Gamma { shape, scale }.validated()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::LogNormal { mu, sigma }.validated()
    }

    fn validated(self) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        let valid = match self {
            Self::Constant { w } => ok(w),
            Self::Gamma { shape, scale } => ok(shape) && ok(scale),
            Self::LogNormal { mu, sigma } => mu.is_finite() && ok(sigma),
        };
        if valid {
            Ok(self)
        } else {
            Err(domain(format!("invalid modulation parameters: {self}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Constant { w } => w,
            Self::Gamma { shape, scale } => shape * scale,
            Self::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
        }
    }

    /// Whether `P(W <= t)` behaves like a power of `t` near zero, the regime in which the
    /// modulated mean keeps the unmodulated exponent. Constant and lognormal weights do not.
    pub fn has_power_law_small_mass(&self) -> bool {
        matches!(self, Self::Gamma { .. })
    }

    /// Small-mass exponent `beta` for gamma weights.
    pub fn small_mass_exponent(&self) -> Option<f64> {
        match *self {
            Self::Gamma { shape, .. } => Some(shape),
            _ => None,
        }
    }
}

impl fmt::Display for ModulationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { w } => write!(f, "constant:{w}"),
            Self::Gamma { shape, scale } => write!(f, "gamma:{shape}:{scale}"),
            Self::LogNormal { mu, sigma } => write!(f, "lognormal:{mu}:{sigma}"),
        }
    }
}

/// Parses `constant:w`, `gamma:shape:scale` or `lognormal:mu:sigma`.
impl FromStr for ModulationLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Parse(format!("modulation `{s}` is missing parameter {i}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("modulation `{s}`: {e}")))
        };
        let law = match (parts[0], parts.len()) {
            ("constant", 2) => Self::constant(num(1)?),
            ("gamma", 3) => Self::gamma(num(1)?, num(2)?),
            ("lognormal", 3) => Self::lognormal(num(1)?, num(2)?),
            _ => return Err(Error::Parse(format!("unknown modulation `{s}`"))),
        };
        law.map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `G(u) = E[1/(1 + uW)]`, in `(0, 1]`.
///
/// Constant weights use the closed form. Otherwise the expectation is integrated in
/// log-coordinates, split where `uW = 1`, and rejected unless the achieved relative
/// error is below [`G_RELATIVE_ERROR`].
#[allow(non_snake_case)]
pub fn modulated_G(u: f64, law: &ModulationLaw) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(domain(format!("G needs u >= 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(1.0);
    }
    let (value, error) = match *law {
        ModulationLaw::Constant { w } => return Ok(1.0 / (1.0 + u * w)),
        ModulationLaw::Gamma { shape, scale } => {
            // W = scale e^y; density in y is exp(shape y - e^y) / Gamma(shape)
            let lg = ln_gamma(shape);
            let ys = -(u * scale).ln();
            let lo = ys.min(0.0) - 60.0 / shape;
            let hi = ys.max(0.0) + 5.0;
            let f = |y: f64| (shape * y - y.exp() - lg).exp() / (1.0 + u * scale * y.exp());
            integrate_split(f, lo, ys, hi)?
        }
        ModulationLaw::LogNormal { mu, sigma } => {
            // beyond |z| = 40 the Gaussian weight is below e^{-800}
            let zs = (-u.ln() - mu) / sigma;
            let z = 40.0;
            let norm = (2.0 * std::f64::consts::PI).sqrt().recip();
            let f = |t: f64| norm * (-0.5 * t * t).exp() / (1.0 + u * (mu + sigma * t).exp());
            integrate_split(f, -z, zs, z)?
        }
    };
    if !(error <= G_RELATIVE_ERROR * value) {
        return Err(Error::Quadrature { achieved: error / value, requested: G_RELATIVE_ERROR });
    }
    Ok(value)
}

fn integrate_split(f: impl Fn(f64) -> f64, lo: f64, split: f64, hi: f64) -> Result<(f64, f64)> {
    let tol = Tolerance { abs: 0.0, rel: 0.1 * G_RELATIVE_ERROR, max_subdivisions: 4000 };
    let mut value = 0.0;
    let mut error = 0.0;
    let cuts: Vec<f64> = if split > lo && split < hi { vec![lo, split, hi] } else { vec![lo, hi] };
    for w in cuts.windows(2) {
        let r = gauss_kronrod(&f, w[0], w[1], tol)?;
        value += r.value;
        error += r.error;
    }
    Ok((value, error))
}

/// Mean search distance under modulation: `sum_{k>=1} (L/2^k) prod_{j>=k} G(rho alpha^j)`.
///
/// Written in the scaled variable `x = rho / alpha` like the unmodulated mean, so a
/// constant unit weight reproduces [`mean_distance_analytic`](super::mean_distance_analytic).
/// The tail uses `-ln G(u) <= ln(1 + E[W] u) <= E[W] u`.
pub fn modulated_mean_distance(cfg: &CityConfig<f64>, law: &ModulationLaw, eps: f64) -> Result<HarmonicEval<f64>> {
    check_eps(eps)?;
    let x = cfg.scaled_intensity();
    let alpha = cfg.alpha();
    let length = cfg.length();
    let factor = |j: usize| -> Result<f64> {
        let u = x * alpha.powi(j as i32);
        match *law {
            ModulationLaw::Constant { w } => Ok((u * w).ln_1p()),
            _ => Ok(-modulated_G(u, law)?.ln()),
        }
    };
    match cfg.depth() {
        Depth::Finite(k) => Ok(HarmonicEval {
            value: harmonic_sum_with(length, k as usize, false, factor)?,
            truncation_bound: 0.0,
            terms_used: k as usize,
        }),
        Depth::Infinite => {
            if x == 0.0 {
                return Ok(HarmonicEval { value: length, truncation_bound: 0.0, terms_used: 0 });
            }
            let (count, tail) = truncation_for(x * law.mean(), alpha, eps)?;
            let value = harmonic_sum_with(length, count, true, factor)?;
            // quadrature error of each factor feeds through as a relative error
            let quad = G_RELATIVE_ERROR * count as f64 * value;
            let quad = if matches!(law, ModulationLaw::Constant { .. }) { 0.0 } else { quad };
            Ok(HarmonicEval { value, truncation_bound: length * tail + quad, terms_used: count })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::mean_distance_analytic;

    #[test]
    fn g_closed_forms() {
        let c = ModulationLaw::constant(1.0).unwrap();
        assert_eq!(modulated_G(0.0, &c).unwrap(), 1.0);
        assert_eq!(modulated_G(3.0, &c).unwrap(), 0.25);
        // Gamma(1, 1): E[1/(1+uW)] = e^{1/u} E_1(1/u) / u; at u = 1 this is 0.596347362323194
        let e = ModulationLaw::gamma(1.0, 1.0).unwrap();
        assert!((modulated_G(1.0, &e).unwrap() - 0.596_347_362_323_194_1).abs() < 1e-12);
    }

    #[test]
    fn lognormal_with_zero_spread_limit() {
        let l = ModulationLaw::lognormal(0.0, 1e-4).unwrap();
        assert!((modulated_G(2.0, &l).unwrap() - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn constant_law_matches_unmodulated_mean() {
        let c = ModulationLaw::constant(1.0).unwrap();
        for lambda in [0.0, 1.0, 1e3, 1e8] {
            for depth in [Depth::Infinite, Depth::Finite(25)] {
                let cfg = CityConfig::unit(0.5, lambda, depth).unwrap();
                let a = modulated_mean_distance(&cfg, &c, cfg.eps()).unwrap();
                let b = mean_distance_analytic(&cfg).unwrap();
                assert_eq!(a.value, b.value);
            }
        }
    }

    #[test]
    fn parsing() {
        assert_eq!("gamma:0.5:2".parse::<ModulationLaw>().unwrap(), ModulationLaw::Gamma { shape: 0.5, scale: 2.0 });
        assert_eq!("constant:1".parse::<ModulationLaw>().unwrap(), ModulationLaw::Constant { w: 1.0 });
        assert!("gamma:0.5".parse::<ModulationLaw>().is_err());
        assert!("gamma:-1:2".parse::<ModulationLaw>().is_err());
        assert!("beta:1:1".parse::<ModulationLaw>().is_err());
        let l = ModulationLaw::lognormal(-0.5, 1.0).unwrap();
        assert_eq!(l.to_string().parse::<ModulationLaw>().unwrap(), l);
    }

    #[test]
    fn mean_of_laws() {
        assert_eq!(ModulationLaw::gamma(0.5, 2.0).unwrap().mean(), 1.0);
        assert!((ModulationLaw::lognormal(-0.5, 1.0).unwrap().mean() - 1.0).abs() < 1e-15);
    }
}
