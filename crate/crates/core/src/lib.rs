//! Parking search on hyperfractal street networks.
//!
//! A car starts on a street of depth `k_max` and turns onto ever busier streets until a
//! free slot pops up. This crate evaluates the distance it drives:
//!
//! - [`harmonic`]: closed forms for the mean, second moment, variance and turn count, with
//!   explicit truncation bounds, plus randomly modulated intensities.
//! - [`mellin`]: Mellin transforms, the asymptotic prefactor and its log-periodic fluctuation.
//! - [`sim`]: event-level Monte Carlo on the segment model and on explicit street networks.
//! - [`experiments`]: exponent fits and verification suites.
//!
//! ```
//! use hyperpark::{mean_distance_analytic, CityConfig64, Depth};
//!
//! let cfg = CityConfig64::unit(0.5, 1e3, Depth::Infinite).unwrap();
//! let f = mean_distance_analytic(&cfg).unwrap();
//! assert!(f.value < 1.0 && f.truncation_bound < 1e-10);
//! ```

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod harmonic;
pub mod mellin;
pub mod model;
pub mod quadrature;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use harmonic::{
    distance_moments, harmonic_f, log_g, mean_distance_analytic, mean_turn_deficit, modulated_G,
    modulated_mean_distance, second_moment_analytic, turns_pgf, variance_analytic, HarmonicEval, ModulationLaw,
    SegmentPath,
};
pub use model::{CityConfig, Depth};
pub use scalar::Scalar;
pub use sim::{monte_carlo, McSummary, RngStream, Scenario, SearchOutcome, Strategy, TerminalRule};

pub type CityConfig64 = CityConfig<f64>;
pub type CityConfig32 = CityConfig<f32>;
pub type SegmentPath64 = SegmentPath<f64>;
pub type SegmentPath32 = SegmentPath<f32>;
pub type HarmonicEval64 = HarmonicEval<f64>;
