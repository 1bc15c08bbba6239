//! Mellin transforms of the auxiliary functions and the asymptotic constants read off
//! their poles.
//!
//! Transforms are real-axis integrals after `x = e^t`. Residues come from closed forms
//! and are checked against direct evaluation of the harmonic sums.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::harmonic::{harmonic_f, log_g};
use crate::model::CityConfig;
use crate::quadrature::{gauss_kronrod, tanh_sinh, Integral, Tolerance};

/// A transform value with its quadrature (or truncation) error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MellinValue {
    pub s: Complex64,
    pub value: Complex64,
    pub quad_error: f64,
}

/// Quadrature rule used on each panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    #[default]
    TanhSinh,
    GaussKronrod,
}

const PANEL_WIDTH: f64 = 4.0;

fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, rule: Rule) -> Result<(Complex64, f64)> {
    if b <= a {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let panels = ((b - a) / PANEL_WIDTH).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let tol = Tolerance { abs: tol / panels as f64, rel: 0.0, max_subdivisions: 500 };
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let r: Integral<Complex64, f64> = match rule {
            Rule::TanhSinh => tanh_sinh(&f, lo, hi, tol)?,
            Rule::GaussKronrod => gauss_kronrod(&f, lo, hi, tol)?,
        };
        value += r.value;
        error += r.error;
    }
    Ok((value, error))
}

/// `int_{t_lo}^{t_hi} f(e^t) e^{st} dt`, the Mellin integral of `f` restricted to `[e^{t_lo}, e^{t_hi}]`.
pub fn mellin_numeric(
    f: impl Fn(f64) -> f64,
    s: Complex64,
    t_lo: f64,
    t_hi: f64,
    tol: f64,
    rule: Rule,
) -> Result<MellinValue> {
    let (value, quad_error) = integrate(|t| (s * t).exp() * f(t.exp()), t_lo, t_hi, tol, rule)?;
    Ok(MellinValue { s, value, quad_error })
}

/// `int_0^inf ln(1+x) x^{s-1} dx = pi / (s sin(pi s))` on `-1 < Re(s) < 0`.
pub fn mellin_log1p(s: Complex64) -> Result<Complex64> {
    if !(s.re > -1.0 && s.re < 0.0) {
        return Err(domain(format!("Mellin transform of ln(1+x) needs -1 < Re(s) < 0, got {s}")));
    }
    let pi = std::f64::consts::PI;
    Ok(pi / (s * (s * pi).sin()))
}

/// `g*(s) = int_0^inf g(x) x^{s-1} dx` for `Re(s) > 0`.
pub fn mellin_g_star(s: Complex64, alpha: f64, eps: f64) -> Result<MellinValue> {
    mellin_g_star_with(s, alpha, eps, Rule::TanhSinh)
}

/// [`mellin_g_star`] with an explicit panel rule.
///
/// Splits as `1/s + int_{-inf}^0 (g(e^t) - 1) e^{st} dt + int_0^inf g(e^t) e^{st} dt`. The left
/// integrand is bounded by `alpha/(1-alpha) e^{(1+sigma)t}`; the right one is cut where
/// `d/dt ln g(e^t) + sigma <= -1`, beyond which its tail is at most the integrand itself.
pub fn mellin_g_star_with(s: Complex64, alpha: f64, eps: f64, rule: Rule) -> Result<MellinValue> {
    if !(s.re > 0.0) {
        return Err(domain(format!("g* needs Re(s) > 0, got {s}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Tolerance(eps));
    }
    let sigma = s.re;
    let tol = eps / 4.0;
    let lg = |x: f64| log_g(x, alpha, 1e-18).map(|e| e.value).unwrap_or(f64::NEG_INFINITY);

    let t_lo = ((tol * (1.0 + sigma) * (1.0 - alpha) / alpha).ln() / (1.0 + sigma)).min(0.0);
    let mut t_hi = 0.0f64;
    loop {
        let x = t_hi.exp();
        let slope: f64 = (1..200)
            .map(|j| {
                let y = x * alpha.powi(j);
                y / (1.0 + y)
            })
            .sum();
        let size = (lg(x) + sigma * t_hi).exp();
        if sigma - slope <= -1.0 && size <= tol {
            break;
        }
        t_hi += 1.0;
        if t_hi > 1e4 {
            return Err(Error::Divergent("g* right cutoff".into()));
        }
    }
    let right_tail = (lg(t_hi.exp()) + sigma * t_hi).exp();
    let left_tail = alpha / (1.0 - alpha) * ((1.0 + sigma) * t_lo).exp() / (1.0 + sigma);

    let (left, e1) = integrate(|t| (s * t).exp() * lg(t.exp()).exp_m1(), t_lo, 0.0, tol, rule)?;
    let (right, e2) = integrate(|t| (s * t).exp() * lg(t.exp()).exp(), 0.0, t_hi, tol, rule)?;
    Ok(MellinValue { s, value: s.inv() + left + right, quad_error: e1 + e2 + left_tail + right_tail })
}

/// Leading behavior `f(x) ~ prefactor x^{exponent} (1 + P(ln x))` of the mean distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub exponent: f64,
    pub prefactor: f64,
    /// `prefactor * max |P|`, in the units of `f x^{1/d_F}`.
    pub oscillation_amplitude: f64,
    /// `|ln alpha| = d_F ln 2`.
    pub period: f64,
}

const FOURIER_TERMS: usize = 6;
const MELLIN_EPS: f64 = 1e-12;

/// Fourier coefficients `c_k = g*(1/d_F + i nu_k) / g*(1/d_F)`, `nu_k = 2 pi k / ln alpha`, `k = 1..=n`.
///
/// `P(ln x) = 2 Re sum_k c_k e^{-i nu_k ln x}`.
pub fn fluctuation_coefficients(alpha: f64, n: usize) -> Result<Vec<Complex64>> {
    let d = -alpha.log2();
    let s0 = Complex64::new(1.0 / d, 0.0);
    let base = mellin_g_star(s0, alpha, MELLIN_EPS)?.value.re;
    (1..=n)
        .map(|k| {
            let nu = 2.0 * std::f64::consts::PI * k as f64 / alpha.ln();
            Ok(mellin_g_star(s0 + Complex64::new(0.0, nu), alpha, MELLIN_EPS)?.value / base)
        })
        .collect()
}

/// Evaluates `P` from its Fourier coefficients.
pub fn fluctuation_from_coefficients(coefs: &[Complex64], alpha: f64, log_x: f64) -> f64 {
    coefs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let nu = 2.0 * std::f64::consts::PI * (i + 1) as f64 / alpha.ln();
            2.0 * (c * Complex64::new(0.0, -nu * log_x).exp()).re
        })
        .sum()
}

/// Exponent `-1/d_F`, the residue prefactor `L g*(1/d_F)/|ln alpha|`, the oscillation
/// amplitude and the period of the mean distance as a function of `x = rho/alpha`.
///
/// The residue of `f*` at `1/d_F` is `L g*(1/d_F)/ln alpha`, which is negative; the
/// prefactor is its magnitude.
pub fn asymptotic_mean_constant(cfg: &CityConfig<f64>) -> Result<AsymptoticEstimate> {
    let alpha = cfg.alpha();
    let d = cfg.dimension();
    let gs = mellin_g_star(Complex64::new(1.0 / d, 0.0), alpha, MELLIN_EPS)?;
    let period = alpha.ln().abs();
    let prefactor = cfg.length() * gs.value.re / period;
    let coefs = fluctuation_coefficients(alpha, FOURIER_TERMS)?;
    let samples = 512;
    let peak = (0..samples)
        .map(|i| fluctuation_from_coefficients(&coefs, alpha, period * i as f64 / samples as f64).abs())
        .fold(0.0, f64::max);
    Ok(AsymptoticEstimate { exponent: -1.0 / d, prefactor, oscillation_amplitude: prefactor * peak, period })
}

/// Samples of `P(ln x) = f(x) x^{1/d_F} / prefactor - 1` over one period starting at `x0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogPeriodicProfile {
    pub log_x: Vec<f64>,
    pub relative: Vec<f64>,
    pub period: f64,
    pub prefactor: f64,
}

impl LogPeriodicProfile {
    /// `ln x` reduced modulo the period.
    pub fn phase(&self) -> Vec<f64> {
        self.log_x.iter().map(|l| l.rem_euclid(self.period)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.relative.iter().sum::<f64>() / self.relative.len() as f64
    }

    /// Half the peak-to-peak range.
    pub fn amplitude(&self) -> f64 {
        let (lo, hi) = self.relative.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        0.5 * (hi - lo)
    }
}

/// `P` sampled at `n_samples` equally spaced points of `ln x` in `[ln x0, ln x0 + period)`.
pub fn log_periodic_profile(cfg: &CityConfig<f64>, x0: f64, n_samples: usize) -> Result<LogPeriodicProfile> {
    if !(x0 > 0.0) || n_samples == 0 {
        return Err(domain("profile needs x0 > 0 and at least one sample"));
    }
    let est = asymptotic_mean_constant(cfg)?;
    let inv_d = 1.0 / cfg.dimension();
    let mut log_x = Vec::with_capacity(n_samples);
    let mut relative = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let lx = x0.ln() + est.period * i as f64 / n_samples as f64;
        let x = lx.exp();
        let f = harmonic_f(x, cfg.alpha(), cfg.length(), 1e-16)?;
        if f.truncation_bound > 1e-10 * f.value {
            return Err(Error::Tolerance(f.truncation_bound / f.value));
        }
        log_x.push(lx);
        relative.push(f.value * x.powf(inv_d) / est.prefactor - 1.0);
    }
    Ok(LogPeriodicProfile { log_x, relative, period: est.period, prefactor: est.prefactor })
}

/// Mellin transform `j*(s)` of the jump-over survival function, normalized to residue 1 at `s = 0`.
///
/// `j*(s) = N alpha^s / sin(pi s) prod_{k=1}^{n} (1 - y_k) / (1 - y_k/2)`, `y_k = alpha^{k-s}`.
/// The normalization `N` depends only on `(alpha, n)` and is computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JStar {
    alpha: f64,
    n_terms: usize,
    norm: f64,
}

const POLE_GUARD: f64 = 1e-8;

impl JStar {
    pub fn new(alpha: f64, n_terms: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if n_terms == 0 {
            return Err(domain("j* needs at least one product term"));
        }
        let norm = std::f64::consts::PI
            * (1..=n_terms)
                .map(|k| {
                    let a = alpha.powi(k as i32);
                    (1.0 - a / 2.0) / (1.0 - a)
                })
                .product::<f64>();
        Ok(Self { alpha, n_terms, norm })
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Real pole `1 + 1/d_F`, the root of `1 - alpha^{1-s}/2`.
    pub fn dominant_pole(&self) -> f64 {
        1.0 - std::f64::consts::LN_2 / self.alpha.ln()
    }

    pub fn eval(&self, s: Complex64) -> Result<MellinValue> {
        let ln_a = self.alpha.ln();
        let n = self.n_terms as i64;
        let nearest = s.re.round();
        let near_int = Complex64::new(s.re - nearest, s.im).norm();
        if near_int < POLE_GUARD && (nearest < 1.0 || nearest as i64 > n) {
            return Err(Error::NearPole { s: s.to_string(), distance: near_int });
        }
        // the factor 1 - y_m cancels the zero of sin(pi s) at s = m
        let m = (nearest as i64).clamp(1, n);
        let z = s - m as f64;
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        let lead = sign * cancelled_ratio(z, ln_a);
        let mut value = lead * (s * ln_a).exp() * self.norm;
        for k in 1..=n {
            let y = ((k as f64 - s) * ln_a).exp();
            let denom = 1.0 - y / 2.0;
            if denom.norm() < POLE_GUARD {
                return Err(Error::NearPole { s: s.to_string(), distance: denom.norm() });
            }
            value = if k == m { value / denom } else { value * (1.0 - y) / denom };
        }
        let tail = ((self.n_terms as f64 + 1.0 - s) * ln_a).exp().norm();
        Ok(MellinValue { s, value, quad_error: 2.0 * value.norm() * tail })
    }
}

/// `expm1(-z ln alpha) / sin(pi z)`, regular at `z = 0`.
fn cancelled_ratio(z: Complex64, ln_a: f64) -> Complex64 {
    let pi = std::f64::consts::PI;
    if z.norm() < 1e-5 {
        let num = -ln_a + z * (ln_a * ln_a / 2.0) - z * z * (ln_a.powi(3) / 6.0);
        num / (pi * (1.0 - z * z * (pi * pi / 6.0)))
    } else {
        complex_expm1(-z * ln_a) / (z * pi).sin()
    }
}

fn complex_expm1(w: Complex64) -> Complex64 {
    let (sb, half) = (w.im.sin(), (0.5 * w.im).sin());
    let ea = w.re.exp();
    Complex64::new(ea * (-2.0 * half * half) + w.re.exp_m1(), ea * sb)
}

/// One-shot evaluation of [`JStar`].
pub fn jumpover_jstar(s: Complex64, alpha: f64, n_terms: usize) -> Result<MellinValue> {
    JStar::new(alpha, n_terms)?.eval(s)
}
