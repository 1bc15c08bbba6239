//! Scalar abstraction shared by the analytic layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar the analytic code is generic over (`f32`, `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x < T::lit(0.5) {
        // reflection
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS_COEF[0]);
    let t = x + T::lit(LANCZOS_G + 0.5);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += T::lit(c) / (x + T::lit(i as f64));
    }
    T::lit(0.5) * (T::lit(2.0) * T::PI()).ln() + (x + T::lit(0.5)) * t.ln() - t + a.ln()
}

/// `(1 - e^{-y}) / y` for `y >= 0`, with the `y -> 0` limit 1.
pub(crate) fn one_minus_exp_ratio<T: Scalar>(y: T) -> T {
    if y.abs() < T::lit(1e-6) {
        T::one() - y / T::lit(2.0) + y * y / T::lit(6.0)
    } else {
        -(-y).exp_m1() / y
    }
}

/// `(1 - e^{-y}(1 + y)) / y^2`, limit 1/2 at `y = 0`.
pub(crate) fn second_order_ratio<T: Scalar>(y: T) -> T {
    if y.abs() < T::lit(1e-3) {
        // sum_{n>=2} (-1)^n (n-1) y^{n-2} / n!
        let mut term = T::one();
        let mut fact = T::lit(2.0);
        let mut acc = T::zero();
        for n in 2..12 {
            if n > 2 {
                fact *= T::lit(n as f64);
                term *= -y;
            }
            acc += term * T::lit((n - 1) as f64) / fact;
        }
        acc
    } else {
        (-(-y).exp_m1() - y * (-y).exp()) / (y * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_known_values() {
        assert!((ln_gamma(1.0_f64)).abs() < 1e-14);
        assert!((ln_gamma(0.5_f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(5.0_f64) - 24.0_f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(2.5_f64) - 1.329_340_388_179_137_f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn ratios_continuous_at_switch() {
        for y in [1e-7, 9.99e-7, 1.01e-6, 1e-4, 9.99e-4, 1.01e-3, 0.3, 5.0] {
            let direct = -(-y).exp_m1() / y;
            assert!((one_minus_exp_ratio(y) - direct).abs() < 1e-12);
        }
        let exact = |y: f64| (1.0 - (-y).exp() * (1.0 + y)) / (y * y);
        for y in [0.999e-3, 1.001e-3, 0.5, 3.0] {
            assert!((second_order_ratio(y) - exact(y)).abs() < 1e-9, "{y}");
        }
        assert!((second_order_ratio(0.0_f64) - 0.5).abs() < 1e-15);
    }
}
