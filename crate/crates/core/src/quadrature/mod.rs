//! One-dimensional quadrature: adaptive Gauss–Kronrod (21 points) and tanh–sinh.

mod gauss_kronrod;
mod tanh_sinh;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::scalar::Scalar;

pub use gauss_kronrod::{gauss_kronrod, gk21};
pub use tanh_sinh::tanh_sinh;

/// Values a quadrature rule can accumulate: real or complex.
pub trait Integrand<T: Scalar>: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> T;
}

impl<T: Scalar> Integrand<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Scalar> Integrand<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

/// Result of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<V, T> {
    pub value: V,
    pub error: T,
    pub evaluations: usize,
}

/// Stopping rule: stop once `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> Tolerance<T> {
    pub fn relative(rel: T) -> Self {
        Self { abs: T::zero(), rel, max_subdivisions: 2000 }
    }

    pub fn absolute(abs: T) -> Self {
        Self { abs, rel: T::zero(), max_subdivisions: 2000 }
    }

    pub(crate) fn target(&self, magnitude: T) -> T {
        self.abs.max(self.rel * magnitude)
    }
}
