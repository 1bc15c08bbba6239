//! Closed-form and truncation-bounded evaluation of the search-distance formulas.

mod hyperfractal;
mod modulation;
mod path;

pub use hyperfractal::{
    diagonal_series, distance_moments, g_product, harmonic_f, harmonic_f_finite, log_g, log_g_expansion,
    log_g_fluctuation, mean_distance_analytic, mean_turn_deficit, mean_turn_deficit_finite, pgf_coefficients,
    second_moment_analytic, turn_distribution, turns_pgf, variance_analytic, DistanceMoments, HarmonicEval,
};
pub use modulation::{modulated_G, modulated_mean_distance, ModulationLaw, G_RELATIVE_ERROR};
pub use path::{
    laplace_transform_distance, mean_distance_exponential, mean_distance_fixed_path, second_moment_exponential,
    second_moment_fixed_path, variance_exponential, LengthSpec, Segment, SegmentPath,
};
