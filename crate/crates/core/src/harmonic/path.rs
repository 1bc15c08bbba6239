//! Distance moments along an explicit sequence of street segments.
//!
//! The car drives the segments in order and parks at the first pop-up slot.
//! If no slot appears, the distance is the total length driven, which is what
//! the closed forms below compute (`E[min(T, S)]` per segment).

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::scalar::{one_minus_exp_ratio, second_order_ratio, CompensatedSum, Scalar};

/// How a segment's length is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthSpec<T> {
    /// Deterministic length `|S_i|`.
    Fixed(T),
    /// Exponentially distributed length with the given rate (mean `1/rate`).
    Rate(T),
}

/// One street segment: pop-up intensity and length law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub lambda: T,
    pub length: LengthSpec<T>,
}

/// Nonempty ordered list of segments, all with the same kind of length spec.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPath<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> SegmentPath<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        let first = segments.first().ok_or_else(|| domain("a path needs at least one segment"))?;
        let fixed = matches!(first.length, LengthSpec::Fixed(_));
        for (i, s) in segments.iter().enumerate() {
            if !(s.lambda >= T::zero()) || !s.lambda.is_finite() {
                return Err(domain(format!("segment {i}: intensity must be finite and >= 0, got {}", s.lambda)));
            }
            let (v, is_fixed) = match s.length {
                LengthSpec::Fixed(v) => (v, true),
                LengthSpec::Rate(v) => (v, false),
            };
            if is_fixed != fixed {
                return Err(domain("a path cannot mix fixed and exponential lengths"));
            }
            if !(v > T::zero()) || !v.is_finite() {
                return Err(domain(format!("segment {i}: length/rate must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { segments })
    }

    /// Path from `(lambda_i, |S_i|)` pairs.
    pub fn fixed(pairs: &[(T, T)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(lambda, s)| Segment { lambda, length: LengthSpec::Fixed(s) }).collect())
    }

    /// Path from `(lambda_i, rate_i)` pairs.
    pub fn exponential(pairs: &[(T, T)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(lambda, a)| Segment { lambda, length: LengthSpec::Rate(a) }).collect())
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.segments[0].length, LengthSpec::Fixed(_))
    }

    /// Drops the first segment; `None` if nothing would remain.
    pub fn tail(&self) -> Option<Self> {
        (self.segments.len() > 1).then(|| Self { segments: self.segments[1..].to_vec() })
    }

    fn fixed_pairs(&self) -> Result<impl Iterator<Item = (T, T)> + '_> {
        if !self.is_fixed() {
            return Err(domain("operation needs a fixed-length path"));
        }
        Ok(self.segments.iter().map(|s| match s.length {
            LengthSpec::Fixed(v) => (s.lambda, v),
            LengthSpec::Rate(_) => unreachable!(),
        }))
    }

    fn rate_pairs(&self) -> Result<impl Iterator<Item = (T, T)> + '_> {
        if self.is_fixed() {
            return Err(domain("operation needs an exponential-length path"));
        }
        Ok(self.segments.iter().map(|s| match s.length {
            LengthSpec::Rate(v) => (s.lambda, v),
            LengthSpec::Fixed(_) => unreachable!(),
        }))
    }
}

/// `E[D]` for fixed lengths: `sum_i (1 - e^{-lambda_i S_i})/lambda_i * prod_{j<i} e^{-lambda_j S_j}`.
pub fn mean_distance_fixed_path<T: Scalar>(path: &SegmentPath<T>) -> Result<T> {
    let mut acc = CompensatedSum::new();
    let mut log_survival = T::zero();
    for (lambda, s) in path.fixed_pairs()? {
        let y = lambda * s;
        acc.add(s * one_minus_exp_ratio(y) * (-log_survival).exp());
        log_survival += y;
    }
    Ok(acc.value())
}

/// `E[D]` for exponential lengths: `sum_i 1/(lambda_i + a_i) * prod_{j<i} a_j/(lambda_j + a_j)`.
pub fn mean_distance_exponential<T: Scalar>(path: &SegmentPath<T>) -> Result<T> {
    Ok(exponential_moments(path.rate_pairs()?).0)
}

/// `E[D^2]` for fixed lengths.
///
/// Segment `i` contributes `2 (sigma_{i-1} phi_i + psi_i)` weighted by the probability of
/// reaching it, where `phi = (1 - e^{-y})/lambda` and `psi = (1 - e^{-y}(1 + y))/lambda^2`.
pub fn second_moment_fixed_path<T: Scalar>(path: &SegmentPath<T>) -> Result<T> {
    let two = T::lit(2.0);
    let mut acc = CompensatedSum::new();
    let mut log_survival = T::zero();
    let mut sigma = T::zero();
    for (lambda, s) in path.fixed_pairs()? {
        let y = lambda * s;
        let phi = s * one_minus_exp_ratio(y);
        let psi = s * s * second_order_ratio(y);
        acc.add(two * (sigma * phi + psi) * (-log_survival).exp());
        log_survival += y;
        sigma += s;
    }
    Ok(acc.value())
}

/// `E[D^2]` for exponential lengths, including the cross terms between segments.
///
/// Time spent on segment `l` is `Exp(c_l)` with `c_l = lambda_l + a_l`, independent of
/// whether the car parks there, so `E[D^2] = 2 sum_l P(reach l)/c_l * sum_{i<=l} 1/c_i`.
pub fn second_moment_exponential<T: Scalar>(path: &SegmentPath<T>) -> Result<T> {
    Ok(exponential_moments(path.rate_pairs()?).1)
}

/// Variance of the distance for an exponential-length path.
pub fn variance_exponential<T: Scalar>(path: &SegmentPath<T>) -> Result<T> {
    let (m1, m2) = exponential_moments(path.rate_pairs()?);
    Ok(m2 - m1 * m1)
}

pub(crate) fn exponential_moments<T: Scalar>(pairs: impl Iterator<Item = (T, T)>) -> (T, T) {
    let two = T::lit(2.0);
    let mut mean = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    let mut reach = T::one();
    let mut tau = CompensatedSum::new();
    for (lambda, a) in pairs {
        let c = lambda + a;
        tau.add(c.recip());
        mean.add(reach / c);
        second.add(two * reach / c * tau.value());
        reach *= a / c;
    }
    (mean.value(), second.value())
}

/// `E[e^{-sD}]` for a fixed-length path.
///
/// Written with `(1 - e^{-(lambda+s)S})/(lambda+s)` so that no pole appears at `s = -lambda`.
pub fn laplace_transform_distance<T: Scalar>(path: &SegmentPath<T>, s: Complex<T>) -> Result<Complex<T>> {
    if !(s.re >= T::zero()) || !s.im.is_finite() {
        return Err(domain(format!("Laplace argument needs Re(s) >= 0, got {s}")));
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut log_survival = Complex::new(T::zero(), T::zero());
    for (lambda, len) in path.fixed_pairs()? {
        let c = s + lambda;
        acc += complex_phi(c, len) * (-log_survival).exp() * lambda;
        log_survival += c * len;
    }
    Ok(acc + (-log_survival).exp())
}

/// `(1 - e^{-c S})/c`, continuous at `c = 0`.
fn complex_phi<T: Scalar>(c: Complex<T>, len: T) -> Complex<T> {
    let w = c * len;
    if w.norm() < T::lit(0.1) {
        // sum_{n>=0} (-w)^n/(n+1)!
        let mut term = Complex::new(T::one(), T::zero());
        let mut acc = term;
        for n in 1..20 {
            term = term * (-w) / T::lit((n + 1) as f64);
            acc += term;
        }
        acc * len
    } else {
        (Complex::new(T::one(), T::zero()) - (-w).exp()) / c
    }
}
