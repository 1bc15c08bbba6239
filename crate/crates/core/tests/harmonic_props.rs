use hyperpark::harmonic::{
    diagonal_series, g_product, harmonic_f, log_g, log_g_expansion, log_g_fluctuation, mean_turn_deficit, modulated_G,
    modulated_mean_distance, pgf_coefficients, turn_distribution, turns_pgf,
};
use hyperpark::{mean_distance_analytic, variance_analytic, CityConfig, Depth, ModulationLaw};
use num_complex::Complex64;
use proptest::prelude::*;

const A: f64 = 0.125;

/// `g` by brute-force product over 400 factors.
fn g_direct(x: f64, alpha: f64) -> f64 {
    (1..400).map(|j| 1.0 / (1.0 + x * alpha.powi(j))).product()
}

/// `f` by brute-force summation.
fn f_direct(x: f64, alpha: f64, length: f64) -> f64 {
    (1..200).map(|k| length * 0.5f64.powi(k) * g_direct(x * alpha.powi(k), alpha)).sum()
}

#[test]
fn f_at_zero_is_length_for_random_configs() {
    let cases: [(f64, f64); 5] = [(0.1, 1.0), (0.3, 2.5), (0.5, 1.0), (0.7, 0.2), (0.9, 10.0)];
    for &(p, l) in &cases {
        let cfg = CityConfig::new(p, l, 0.0, Depth::Infinite).unwrap();
        assert!((mean_distance_analytic(&cfg).unwrap().value - l).abs() <= 1e-12);
    }
}

#[test]
fn log_g_expansion_residual_is_log_periodic() {
    // the four-term expansion leaves a zero-mean oscillation of amplitude ~1.5e-4
    let res = |x: f64| log_g(x, A, 1e-16).unwrap().value - log_g_expansion(x, A);
    let r: Vec<f64> = [1e4, 1e5, 1e6].iter().map(|&x| res(x).abs()).collect();
    assert!(r[2] < 1e-3);
    assert!(r.iter().all(|v| *v < 2e-4));
    // adding the fluctuation leaves an O(1/x) remainder
    for x in [1e4, 1e5, 1e6] {
        let full = res(x) - log_g_fluctuation(x, A, 8);
        assert!(full.abs() < 2.0 / x, "{x}: {full}");
    }
}

#[test]
fn turn_pgf_derivative_is_mean_deficit() {
    for rho in [10.0, 1e3, 1e6] {
        let h = 1e-5;
        let up = turns_pgf(rho, Complex64::new(1.0 + h, 0.0), A, 1e-14).unwrap().re;
        let down = turns_pgf(rho, Complex64::new(1.0 - h, 0.0), A, 1e-14).unwrap().re;
        let m = mean_turn_deficit(rho, A, 1e-14).unwrap().value;
        assert!(((up - down) / (2.0 * h) - m).abs() < 1e-6 * m.max(1.0), "{rho}");
        let at_one = turns_pgf(rho, Complex64::new(1.0, 0.0), A, 1e-14).unwrap();
        assert!((at_one - 1.0).norm() < 1e-15);
    }
}

#[test]
fn pgf_coefficients_match_distribution() {
    let rho = 500.0;
    let coefs = pgf_coefficients(rho, A, 12, 1e-14).unwrap();
    let dist = turn_distribution(rho, A, 11, 1e-14).unwrap();
    for (c, d) in coefs.iter().zip(&dist) {
        assert!((c - d).abs() < 1e-10);
    }
}

#[test]
fn modulated_g_against_midpoint_rule() {
    // Gamma(2, 1): E[1/(1+uW)] = int w e^{-w}/(1+uw) dw, by a fine midpoint rule
    let law = ModulationLaw::gamma(2.0, 1.0).unwrap();
    for u in [0.1, 1.0, 30.0] {
        let n = 2_000_000;
        let h = 60.0 / n as f64;
        let quad: f64 = (0..n)
            .map(|i| {
                let w = (i as f64 + 0.5) * h;
                w * (-w).exp() / (1.0 + u * w) * h
            })
            .sum();
        assert!((modulated_G(u, &law).unwrap() - quad).abs() < 1e-9, "{u}");
    }
}

#[test]
fn gamma_small_mass_keeps_power_decay() {
    let law = ModulationLaw::gamma(0.5, 2.0).unwrap();
    let v: Vec<f64> =
        [1e2, 1e4, 1e6].iter().map(|&u: &f64| modulated_G(u, &law).unwrap().ln() + 0.5 * u.ln()).collect();
    let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.1, "{v:?}");
}

#[test]
fn modulation_increases_mean_distance() {
    // Jensen: G(u) >= 1/(1 + u E[W])
    let cfg = CityConfig::unit(0.5, 1e4, Depth::Infinite).unwrap();
    let base = mean_distance_analytic(&cfg).unwrap().value;
    for law in [ModulationLaw::gamma(0.5, 2.0).unwrap(), ModulationLaw::lognormal(-0.5, 1.0).unwrap()] {
        let m = modulated_mean_distance(&cfg, &law, 1e-12).unwrap().value;
        assert!(m > base, "{law}");
    }
}

#[test]
fn diagonal_series_undercounts_second_moment() {
    // 2F is the same-segment part only; the full second moment is larger
    for lambda in [0.0, 10.0, 1e4] {
        let cfg = CityConfig::unit(0.5, lambda, Depth::Infinite).unwrap();
        let x = cfg.rho();
        let m2 = hyperpark::second_moment_analytic(&cfg).unwrap().value;
        let f2 = 2.0 * diagonal_series(x, A, 1.0, 1e-14).unwrap().value;
        assert!(f2 < m2);
    }
}

proptest! {
    #[test]
    fn g_matches_direct_product(x in 0.0f64..1e6, alpha in 0.05f64..0.24) {
        let g = g_product(x, alpha, 1e-15).unwrap();
        let d = g_direct(x, alpha);
        prop_assert!((g.value - d).abs() <= 1e-12 * d + g.truncation_bound);
        prop_assert!(g.value > 0.0 && g.value <= 1.0);
    }

    #[test]
    fn f_matches_direct_sum(x in 0.0f64..1e5, alpha in 0.05f64..0.24, length in 0.1f64..10.0) {
        let f = harmonic_f(x, alpha, length, 1e-14).unwrap();
        let d = f_direct(x, alpha, length);
        prop_assert!((f.value - d).abs() <= 1e-11 * length + f.truncation_bound);
    }

    #[test]
    fn f_scaling_relation(x in 1e-3f64..1e6, alpha in 0.05f64..0.24) {
        let lhs = harmonic_f(x / alpha, alpha, 1.0, 1e-15).unwrap().value;
        let rhs = 0.5 * harmonic_f(x, alpha, 1.0, 1e-15).unwrap().value + 0.5 * g_product(x, alpha, 1e-15).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn mean_decreases_in_lambda(p in 0.05f64..0.95, l1 in 0.0f64..1e5, factor in 1.01f64..10.0) {
        let a = CityConfig::unit(p, l1, Depth::Infinite).unwrap();
        let b = a.with_lambda(l1 * factor + 1e-3).unwrap();
        let fa = mean_distance_analytic(&a).unwrap().value;
        let fb = mean_distance_analytic(&b).unwrap().value;
        prop_assert!(fb < fa && fa <= 1.0);
    }

    #[test]
    fn variance_is_nonnegative(p in 0.05f64..0.95, lambda in 0.0f64..1e8, k in prop::option::of(1u32..40)) {
        let depth = k.map_or(Depth::Infinite, Depth::Finite);
        let cfg = CityConfig::unit(p, lambda, depth).unwrap();
        let v = variance_analytic(&cfg).unwrap();
        prop_assert!(v.value >= -v.truncation_bound);
    }

    #[test]
    fn turn_distribution_sums_to_one(rho in 0.0f64..1e8) {
        let d = turn_distribution(rho, A, 60, 1e-15).unwrap();
        prop_assert!(d.iter().all(|p| *p >= -1e-15));
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
