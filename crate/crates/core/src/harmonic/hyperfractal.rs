//! Harmonic sums of the hyperfractal search: `g`, `f`, the diagonal series `F`,
//! the variance, and the distribution of the turn deficit.
//!
//! A jumpless search starting at depth `K` drives segments of depths `K, K-1, ..., 1`
//! with mean lengths `L/2^k` and expected pop-up counts `r_k = rho alpha^k`. Reaching
//! the central cross (depth 0) ends the path.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::model::{CityConfig, Depth};
use crate::scalar::{CompensatedSum, Scalar};

use super::path::exponential_moments;

/// Value of a truncated series together with a bound on the omitted part.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HarmonicEval<T> {
    pub value: T,
    /// Upper bound on `|exact - value|` from truncation.
    pub truncation_bound: T,
    pub terms_used: usize,
}

impl<T: Scalar> HarmonicEval<T> {
    fn exact(value: T, terms_used: usize) -> Self {
        Self { value, truncation_bound: T::zero(), terms_used }
    }
}

const MAX_TERMS: usize = 100_000;

pub(crate) fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(domain(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

pub(crate) fn check_eps<T: Scalar>(eps: T) -> Result<()> {
    if eps > T::zero() {
        Ok(())
    } else {
        Err(Error::Tolerance(eps.as_f64()))
    }
}

fn check_x<T: Scalar>(x: T) -> Result<()> {
    if x >= T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("argument must be finite and >= 0, got {x}")))
    }
}

/// Smallest `J >= min_terms` with `x alpha^{J+1} / (1 - alpha) <= eps`, and that tail.
fn truncation_point<T: Scalar>(x: T, alpha: T, eps: T, min_terms: usize) -> Result<(usize, T)> {
    let mut j = min_terms;
    let mut tail = x * alpha.powi(j as i32 + 1) / (T::one() - alpha);
    while tail > eps {
        j += 1;
        tail *= alpha;
        if j > MAX_TERMS {
            return Err(Error::Divergent(format!("no truncation point below {MAX_TERMS} terms")));
        }
    }
    Ok((j, tail))
}

/// `ln g(x)` with `g(x) = prod_{j>=1} 1/(1 + x alpha^j)`.
///
/// The bound is the omitted `sum_{j>J} ln(1 + x alpha^j) <= x alpha^{J+1}/(1 - alpha)`.
pub fn log_g<T: Scalar>(x: T, alpha: T, eps: T) -> Result<HarmonicEval<T>> {
    check_x(x)?;
    check_alpha(alpha)?;
    check_eps(eps)?;
    if x == T::zero() {
        return Ok(HarmonicEval::exact(T::zero(), 0));
    }
    let (terms, tail) = truncation_point(x, alpha, eps, 0)?;
    let mut acc = CompensatedSum::new();
    let mut y = x;
    for _ in 0..terms {
        y *= alpha;
        acc.add(-y.ln_1p());
    }
    Ok(HarmonicEval { value: acc.value(), truncation_bound: tail, terms_used: terms })
}

/// The auxiliary product `g(x) = prod_{j>=1} 1/(1 + x alpha^j)`, in `(0, 1]`.
pub fn g_product<T: Scalar>(x: T, alpha: T, eps: T) -> Result<HarmonicEval<T>> {
    let lg = log_g(x, alpha, eps)?;
    let value = lg.value.exp();
    Ok(HarmonicEval { value, truncation_bound: value * lg.truncation_bound, terms_used: lg.terms_used })
}

/// Shared evaluation of `sum_{k=1}^{J} (L/2^k) exp(-sum_{j>k} t_j)`.
///
/// `t(j)` is the negative log of the `j`-th factor. With `closing` the product stops at
/// `j = J` and the remainder `sum_{k>J} L/2^k = L/2^J` is added (infinite depth);
/// otherwise the product runs to `j = J + 1` (finite depth `J`).
fn harmonic_sum<T: Scalar>(length: T, count: usize, closing: bool, mut t: impl FnMut(usize) -> Result<T>) -> Result<T> {
    let mut acc = CompensatedSum::new();
    let mut weight = length * T::lit(0.5).powi(count as i32);
    let mut suffix = if closing {
        acc.add(weight);
        T::zero()
    } else {
        t(count + 1)?
    };
    for k in (1..=count).rev() {
        acc.add(weight * (-suffix).exp());
        suffix += t(k)?;
        weight = weight + weight;
    }
    Ok(acc.value())
}

/// `f(x) = sum_{k>=1} (L/2^k) g(alpha^k x)`, with `f(0) = L`.
pub fn harmonic_f<T: Scalar>(x: T, alpha: T, length: T, eps: T) -> Result<HarmonicEval<T>> {
    check_x(x)?;
    check_alpha(alpha)?;
    check_eps(eps)?;
    if x == T::zero() {
        return Ok(HarmonicEval::exact(length, 0));
    }
    let (count, tail) = truncation_point(x, alpha, eps, 1)?;
    let value = harmonic_sum(length, count, true, |j| Ok((x * alpha.powi(j as i32)).ln_1p()))?;
    Ok(HarmonicEval { value, truncation_bound: length * tail, terms_used: count })
}

/// Finite-depth counterpart: `sum_{k=1}^{K} (L/2^k) prod_{j=k+1}^{K+1} 1/(1 + x alpha^j)`.
pub fn harmonic_f_finite<T: Scalar>(x: T, alpha: T, length: T, depth: u32) -> Result<T> {
    check_x(x)?;
    check_alpha(alpha)?;
    harmonic_sum(length, depth as usize, false, |j| Ok((x * alpha.powi(j as i32)).ln_1p()))
}

pub(crate) fn harmonic_sum_with<T: Scalar>(
    length: T,
    count: usize,
    closing: bool,
    t: impl FnMut(usize) -> Result<T>,
) -> Result<T> {
    harmonic_sum(length, count, closing, t)
}

pub(crate) fn truncation_for<T: Scalar>(x: T, alpha: T, eps: T) -> Result<(usize, T)> {
    truncation_point(x, alpha, eps, 1)
}

/// Expected search distance of the jumpless strategy.
pub fn mean_distance_analytic<T: Scalar>(cfg: &CityConfig<T>) -> Result<HarmonicEval<T>> {
    let x = cfg.scaled_intensity();
    match cfg.depth() {
        Depth::Infinite => harmonic_f(x, cfg.alpha(), cfg.length(), cfg.eps()),
        Depth::Finite(k) => Ok(HarmonicEval::exact(harmonic_f_finite(x, cfg.alpha(), cfg.length(), k)?, k as usize)),
    }
}

/// First and second moment of the jumpless distance, plus the truncation bounds of each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceMoments<T> {
    pub mean: T,
    pub second: T,
    pub mean_bound: T,
    pub second_bound: T,
    pub depth_used: u32,
}

/// Both moments from the exact exponential-path recursion.
///
/// At infinite depth the path is cut at depth `K`; dropping the deeper segments moves
/// the mean by at most `L(T + 2^{-K})` and the second moment by at most
/// `2L^2(T + 2^{-K}) + (4/3)L^2 4^{-K}`, where `T = rho alpha^{K+1}/(1 - alpha)`.
pub fn distance_moments<T: Scalar>(cfg: &CityConfig<T>) -> Result<DistanceMoments<T>> {
    let l = cfg.length();
    let rho = cfg.rho();
    let alpha = cfg.alpha();
    let two = T::lit(2.0);
    let bounds = |k: u32| {
        let tr = rho * alpha.powi(k as i32 + 1) / (T::one() - alpha);
        let half_k = T::lit(0.5).powi(k as i32);
        let b1 = l * (tr + half_k);
        let b2 = two * l * l * (tr + half_k) + T::lit(4.0 / 3.0) * l * l * half_k * half_k;
        (b1, b2)
    };
    let (depth, b1, b2) = match cfg.depth() {
        Depth::Finite(k) => (k, T::zero(), T::zero()),
        Depth::Infinite => {
            let target = cfg.eps() * l * l;
            let mut k = 1u32;
            loop {
                let (b1, b2) = bounds(k);
                if b2 + two * l * b1 + b1 * b1 <= target {
                    break (k, b1, b2);
                }
                k += 1;
                if k as usize > MAX_TERMS {
                    return Err(Error::Divergent("variance truncation".into()));
                }
            }
        }
    };
    let rates = cfg.rates();
    let pairs = (1..=depth).rev().map(|k| (rates.lambda_k(k), rates.segment_rate(k)));
    let (mean, second) = exponential_moments(pairs);
    Ok(DistanceMoments { mean, second, mean_bound: b1, second_bound: b2, depth_used: depth })
}

/// Second moment of the jumpless search distance.
pub fn second_moment_analytic<T: Scalar>(cfg: &CityConfig<T>) -> Result<HarmonicEval<T>> {
    let m = distance_moments(cfg)?;
    Ok(HarmonicEval { value: m.second, truncation_bound: m.second_bound, terms_used: m.depth_used as usize })
}

/// Variance of the jumpless search distance.
///
/// Includes the cross terms between segments, so the `lambda -> 0` limit is the
/// variance of a sum of exponential lengths, `L^2/3` at infinite depth.
pub fn variance_analytic<T: Scalar>(cfg: &CityConfig<T>) -> Result<HarmonicEval<T>> {
    let m = distance_moments(cfg)?;
    let value = m.second - m.mean * m.mean;
    let bound = m.second_bound + T::lit(2.0) * m.mean * m.mean_bound + m.mean_bound * m.mean_bound;
    // rounding floor on the subtraction
    let floor = T::lit(16.0) * T::epsilon() * m.second;
    if value < -(bound + floor) {
        return Err(Error::NegativeVariance { value: value.as_f64(), bound: bound.as_f64() });
    }
    Ok(HarmonicEval { value, truncation_bound: bound, terms_used: m.depth_used as usize })
}

/// `F(x) = sum_{k>=1} (L^2/4^k) h(alpha^k x) g(alpha^k x)` with `h(y) = 1/(1+y)^2`.
///
/// `2F(rho)` is the same-segment part of the second moment; the variance needs the
/// cross-segment part as well (see [`variance_analytic`]).
pub fn diagonal_series<T: Scalar>(x: T, alpha: T, length: T, eps: T) -> Result<HarmonicEval<T>> {
    check_x(x)?;
    check_alpha(alpha)?;
    check_eps(eps)?;
    let l2 = length * length;
    let quarter = T::lit(0.25);
    let mut acc = CompensatedSum::new();
    let mut k = 1usize;
    loop {
        let y = x * alpha.powi(k as i32);
        let g = g_product(y, alpha, eps * T::lit(1e-3))?;
        let h = (T::one() + y).powi(-2);
        let w = l2 * quarter.powi(k as i32);
        acc.add(w * h * g.value);
        // remaining terms are bounded by sum_{j>k} L^2 4^{-j}
        let rest = w / T::lit(3.0);
        if rest <= eps * l2 {
            let bound = rest + acc.value() * g.truncation_bound / g.value.max(T::min_positive_value());
            return Ok(HarmonicEval { value: acc.value(), truncation_bound: bound, terms_used: k });
        }
        k += 1;
    }
}

/// `E[k_max - T] = sum_{k>=0} (1 - g(x alpha^k))` with `x = rho`.
pub fn mean_turn_deficit<T: Scalar>(x: T, alpha: T, eps: T) -> Result<HarmonicEval<T>> {
    check_x(x)?;
    check_alpha(alpha)?;
    check_eps(eps)?;
    if x == T::zero() {
        return Ok(HarmonicEval::exact(T::zero(), 0));
    }
    let inner = eps * T::lit(1e-3);
    let mut acc = CompensatedSum::new();
    let mut err = T::zero();
    let mut k = 0usize;
    loop {
        let lg = log_g(x * alpha.powi(k as i32), alpha, inner)?;
        acc.add(-lg.value.exp_m1());
        err += lg.truncation_bound;
        // sum_{j>k} (1 - g(x alpha^j)) <= x alpha^{k+2} / (1 - alpha)^2
        let tail = x * alpha.powi(k as i32 + 2) / ((T::one() - alpha) * (T::one() - alpha));
        k += 1;
        if tail <= eps {
            return Ok(HarmonicEval { value: acc.value(), truncation_bound: tail + err, terms_used: k });
        }
        if k > MAX_TERMS {
            return Err(Error::Divergent("turn deficit".into()));
        }
    }
}

/// Finite-depth counterpart: `sum_{d=1}^{K} (1 - prod_{k=d}^{K} 1/(1 + x alpha^k))`.
pub fn mean_turn_deficit_finite<T: Scalar>(x: T, alpha: T, depth: u32) -> Result<T> {
    check_x(x)?;
    check_alpha(alpha)?;
    let mut acc = CompensatedSum::new();
    let mut log_survival = T::zero();
    for d in (1..=depth).rev() {
        log_survival -= (x * alpha.powi(d as i32)).ln_1p();
        acc.add(-log_survival.exp_m1());
    }
    Ok(acc.value())
}

/// `P(k_max - T = d)` for `d = 0..=max_deficit` at infinite depth.
///
/// `P(0) = g(x)` and `P(d) = g(x alpha^d) - g(x alpha^{d-1})`.
pub fn turn_distribution<T: Scalar>(x: T, alpha: T, max_deficit: usize, eps: T) -> Result<Vec<T>> {
    let gs = (0..=max_deficit)
        .map(|d| g_product(x * alpha.powi(d as i32), alpha, eps).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=max_deficit).map(|d| if d == 0 { gs[0] } else { gs[d] - gs[d - 1] }).collect())
}

/// Probability generating function `E[u^{k_max - T}] = (1-u) sum_{k>=0} (g(x alpha^k) - 1) u^k + 1`.
pub fn turns_pgf<T: Scalar>(x: T, u: Complex<T>, alpha: T, eps: T) -> Result<Complex<T>> {
    check_x(x)?;
    check_alpha(alpha)?;
    check_eps(eps)?;
    let r = u.norm() * alpha;
    if !(r < T::one()) {
        return Err(Error::Divergent(format!("turns generating function needs |u| < 1/alpha, got |u| = {}", u.norm())));
    }
    let one = Complex::new(T::one(), T::zero());
    if x == T::zero() {
        return Ok(one);
    }
    let lead = x * alpha / (T::one() - alpha);
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut power = one;
    let mut k = 0usize;
    loop {
        let lg = log_g(x * alpha.powi(k as i32), alpha, eps * T::lit(1e-3))?;
        acc += power * lg.value.exp_m1();
        power *= u;
        k += 1;
        let tail = lead * r.powi(k as i32) / (T::one() - r);
        if tail <= eps || k > MAX_TERMS {
            break;
        }
    }
    Ok((one - u) * acc + one)
}

/// Taylor coefficients of [`turns_pgf`] at `u = 0`, from a trapezoid rule on `|u| = 1`.
pub fn pgf_coefficients<T: Scalar>(x: T, alpha: T, count: usize, eps: T) -> Result<Vec<T>> {
    let n = (4 * count).max(128);
    let tau = T::lit(2.0) * T::PI();
    let values = (0..n)
        .map(|m| {
            let theta = tau * T::lit(m as f64) / T::lit(n as f64);
            turns_pgf(x, Complex::from_polar(T::one(), theta), alpha, eps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..count)
        .map(|d| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (m, v) in values.iter().enumerate() {
                let theta = tau * T::lit((m * d % n) as f64) / T::lit(n as f64);
                acc += *v * Complex::from_polar(T::one(), -theta);
            }
            acc.re / T::lit(n as f64)
        })
        .collect())
}

/// Leading four-term expansion of `ln g(x)` for large `x`.
pub fn log_g_expansion<T: Scalar>(x: T, alpha: T) -> T {
    let lx = x.ln();
    let la = alpha.ln();
    let two = T::lit(2.0);
    lx * lx / (two * la) + lx / two + T::PI() * T::PI() / (T::lit(6.0) * la) + la / T::lit(12.0)
}

/// Zero-mean log-periodic correction to [`log_g_expansion`]:
/// `sum_k 2 pi / (t_k sinh(pi t_k) |ln alpha|) cos(t_k ln x)` with `t_k = 2 pi k / |ln alpha|`.
pub fn log_g_fluctuation<T: Scalar>(x: T, alpha: T, terms: usize) -> T {
    let period = alpha.ln().abs();
    let tau = T::lit(2.0) * T::PI();
    let lx = x.ln();
    (1..=terms)
        .map(|k| {
            let t = tau * T::lit(k as f64) / period;
            tau / (t * (T::PI() * t).sinh() * period) * (t * lx).cos()
        })
        .fold(T::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 0.125;

    #[test]
    fn g_basic_values() {
        assert_eq!(g_product(0.0, A, 1e-12).unwrap().value, 1.0);
        let direct: f64 = (1..200).map(|j| 1.0 / (1.0 + A.powi(j))).product();
        let g = g_product(1.0, A, 1e-16).unwrap();
        assert!((g.value - direct).abs() < 1e-15);
        assert!(g.truncation_bound < 1e-14);
    }

    #[test]
    fn f_at_zero_is_length() {
        assert_eq!(harmonic_f(0.0, A, 3.5, 1e-12).unwrap().value, 3.5);
        // tiny positive x stays within the bound of L
        let e = harmonic_f(1e-300, A, 2.0, 1e-12).unwrap();
        assert!((e.value - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn finite_and_infinite_depth_agree() {
        let cfg = CityConfig::<f64>::unit(0.5, 100.0, Depth::Infinite).unwrap();
        let inf = mean_distance_analytic(&cfg).unwrap();
        let fin = mean_distance_analytic(&cfg.with_depth(Depth::Finite(60))).unwrap();
        assert!((inf.value - fin.value).abs() <= inf.truncation_bound + 1e-15);
    }

    #[test]
    fn f_scaling_relation() {
        // f(x/alpha) = f(x)/2 + (L/2) g(x)
        for x in [0.5, 3.0, 40.0, 1e4] {
            let lhs = harmonic_f(x / A, A, 1.0, 1e-15).unwrap().value;
            let rhs = harmonic_f(x, A, 1.0, 1e-15).unwrap().value / 2.0 + g_product(x, A, 1e-15).unwrap().value / 2.0;
            assert!((lhs - rhs).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn finite_turn_deficit_converges() {
        for x in [0.0, 5.0, 1e4] {
            let inf = mean_turn_deficit(x, A, 1e-14).unwrap();
            let fin = mean_turn_deficit_finite(x, A, 40).unwrap();
            assert!((inf.value - fin).abs() <= inf.truncation_bound + 1e-12, "{x}");
        }
        assert_eq!(mean_turn_deficit_finite(1e300, A, 3).unwrap(), 3.0);
    }

    #[test]
    fn variance_at_zero_intensity() {
        let cfg = CityConfig::<f64>::unit(0.5, 0.0, Depth::Infinite).unwrap();
        let v = variance_analytic(&cfg).unwrap();
        assert!((v.value - 1.0 / 3.0).abs() <= v.truncation_bound + 1e-14);
        let m = distance_moments(&cfg).unwrap();
        assert!((m.mean - 1.0).abs() <= m.mean_bound + 1e-14);
    }

    #[test]
    fn diagonal_series_is_part_of_second_moment() {
        for lambda in [0.0, 1.0, 100.0, 1e5] {
            let cfg = CityConfig::unit(0.5, lambda, Depth::Infinite).unwrap();
            let f2 = diagonal_series(cfg.rho(), cfg.alpha(), 1.0, 1e-14).unwrap().value;
            let m2 = second_moment_analytic(&cfg).unwrap().value;
            assert!(2.0 * f2 < m2);
        }
        // no intensity: diagonal part is sum L^2/4^k = 1/3
        assert!((diagonal_series(0.0, A, 1.0, 1e-15).unwrap().value - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn pgf_normalization_and_origin() {
        for x in [0.1, 5.0, 1e3] {
            let one = turns_pgf(x, Complex::new(1.0, 0.0), A, 1e-14).unwrap();
            assert!((one.re - 1.0).abs() < 1e-15 && one.im == 0.0);
            let at0 = turns_pgf(x, Complex::new(0.0, 0.0), A, 1e-14).unwrap();
            assert!((at0.re - g_product(x, A, 1e-15).unwrap().value).abs() < 1e-14);
        }
        assert!(turns_pgf(1.0, Complex::new(8.0, 0.0), A, 1e-12).is_err());
    }

    #[test]
    fn pgf_coefficients_match_distribution() {
        let x = 2e3;
        let probs = turn_distribution(x, A, 20, 1e-15).unwrap();
        let coefs = pgf_coefficients(x, A, 21, 1e-15).unwrap();
        for (p, c) in probs.iter().zip(&coefs) {
            assert!((p - c).abs() < 1e-12, "{p} vs {c}");
            assert!(*c > -1e-12);
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deficit_at_zero() {
        assert_eq!(mean_turn_deficit(0.0, A, 1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(matches!(g_product(1.0, A, 0.0), Err(Error::Tolerance(_))));
        assert!(g_product(-1.0, A, 1e-12).is_err());
        assert!(g_product(1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn single_precision_f() {
        let e = harmonic_f(1e3f32, 0.125f32, 1.0f32, 1e-6f32).unwrap();
        let d = harmonic_f(1e3f64, A, 1.0, 1e-12).unwrap();
        assert!((e.value as f64 - d.value).abs() < 1e-5);
    }
}
