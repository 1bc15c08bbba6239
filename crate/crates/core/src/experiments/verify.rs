use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::harmonic::{
    mean_distance_analytic, mean_turn_deficit, modulated_G, modulated_mean_distance, turns_pgf, variance_analytic,
    ModulationLaw,
};
use crate::mellin::JStar;
use crate::model::CityConfig;
use crate::scalar::ln_gamma;
use crate::sim::{monte_carlo, McSummary, Scenario, Strategy, TerminalRule};

use super::fit::{fit_scaling_exponent, ExponentFit, Grid};
use super::report::{Check, Report};
use super::{stream_seed, Plan};

/// Slope tolerance for fits of evaluated formulas.
pub const ANALYTIC_SLOPE_TOL: f64 = 0.02;
/// Slope tolerance for fits of simulated means and variances.
pub const MC_SLOPE_TOL: f64 = 0.05;
/// Width of the band that `E[k_max - T] - log2(lambda)/d_F` must stay in.
pub const TURN_BAND: f64 = 2.0;
/// Number of standard errors in pointwise comparisons.
pub const SE_FACTOR: f64 = 3.0;

const TAG_JUMPLESS: u64 = 1;
const TAG_JUMPOVER: u64 = 2;
const TAG_MODULATED: u64 = 16;

fn finite_depth(cfg: &CityConfig<f64>) -> Result<u32> {
    cfg.depth().finite().ok_or_else(|| domain("verification runs need a finite k_max"))
}

fn simulate_grid(
    cfg: &CityConfig<f64>,
    grid: &Grid,
    strategy: Strategy,
    law: Option<ModulationLaw>,
    plan: &Plan,
    tag: u64,
) -> Result<Vec<McSummary>> {
    finite_depth(cfg)?;
    let lambdas = grid.values();
    lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let scenario = Scenario::new(cfg.with_lambda(lambda)?, strategy, law, TerminalRule::Formula)?;
            monte_carlo(&scenario, plan.reps, stream_seed(plan.seed, tag, i as u64))
        })
        .collect()
}

fn slope_checks(report: &mut Report, label: &str, fit: &ExponentFit, target: f64, tol: f64) {
    report.push(Check::within(format!("{label} slope"), target, fit.slope, tol));
    report.push(Check::info(format!("{label} intercept"), fit.intercept));
    report.push(Check::info(format!("{label} r_squared"), fit.r_squared));
}

fn points(lambdas: &[f64], values: impl IntoIterator<Item = f64>) -> Vec<(f64, f64)> {
    lambdas.iter().copied().zip(values).collect()
}

/// Mean scaling: analytic and simulated slopes against `-1/d_F`, and simulated means
/// against the analytic mean at every grid point.
pub fn verify_mean_theorem(cfg: &CityConfig<f64>, plan: &Plan) -> Result<Report> {
    let mut report = Report::new("mean", plan.seed);
    let lambdas = plan.grid.values();
    let target = -1.0 / cfg.dimension();
    let align = Some(cfg.alpha());
    let analytic =
        lambdas.iter().map(|&l| Ok(mean_distance_analytic(&cfg.with_lambda(l)?)?.value)).collect::<Result<Vec<_>>>()?;
    let fit = fit_scaling_exponent(&points(&lambdas, analytic.iter().copied()), align)?;
    slope_checks(&mut report, "analytic mean", &fit, target, ANALYTIC_SLOPE_TOL);

    let mc = simulate_grid(cfg, &plan.grid, Strategy::Jumpless, None, plan, TAG_JUMPLESS)?;
    for ((l, a), s) in lambdas.iter().zip(&analytic).zip(&mc) {
        report.push(Check::within(format!("mean lambda={l:.4e}"), *a, s.mean, SE_FACTOR * s.se_mean));
    }
    let fit = fit_scaling_exponent(&points(&lambdas, mc.iter().map(|s| s.mean)), align)?;
    slope_checks(&mut report, "simulated mean", &fit, target, MC_SLOPE_TOL);
    Ok(report)
}

/// Variance scaling against `-2/d_F` and simulated variances against the analytic variance.
pub fn verify_variance(cfg: &CityConfig<f64>, plan: &Plan) -> Result<Report> {
    let mut report = Report::new("variance", plan.seed);
    let lambdas = plan.grid.values();
    let target = -2.0 / cfg.dimension();
    let align = Some(cfg.alpha());
    let analytic =
        lambdas.iter().map(|&l| Ok(variance_analytic(&cfg.with_lambda(l)?)?.value)).collect::<Result<Vec<_>>>()?;
    let fit = fit_scaling_exponent(&points(&lambdas, analytic.iter().copied()), align)?;
    slope_checks(&mut report, "analytic variance", &fit, target, MC_SLOPE_TOL);

    let mc = simulate_grid(cfg, &plan.grid, Strategy::Jumpless, None, plan, TAG_JUMPLESS)?;
    for ((l, a), s) in lambdas.iter().zip(&analytic).zip(&mc) {
        report.push(Check::within(format!("variance lambda={l:.4e}"), *a, s.variance, SE_FACTOR * s.se_variance));
    }
    let fit = fit_scaling_exponent(&points(&lambdas, mc.iter().map(|s| s.variance)), align)?;
    slope_checks(&mut report, "simulated variance", &fit, target, MC_SLOPE_TOL);
    Ok(report)
}

/// Mean of `k_max - T` from a central difference of the generating function at `u = 1`.
pub fn pgf_mean_deficit(rho: f64, alpha: f64, eps: f64) -> Result<f64> {
    let h = 1e-4;
    let plus = turns_pgf(rho, Complex64::new(1.0 + h, 0.0), alpha, eps)?;
    let minus = turns_pgf(rho, Complex64::new(1.0 - h, 0.0), alpha, eps)?;
    Ok((plus.re - minus.re) / (2.0 * h))
}

fn band(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Turn deficit: `E[k_max - T] - log2(lambda)/d_F` stays in a band of width [`TURN_BAND`],
/// and the generating-function mean matches the simulated histogram.
pub fn verify_turns_theorem(cfg: &CityConfig<f64>, plan: &Plan) -> Result<Report> {
    let mut report = Report::new("turns", plan.seed);
    let lambdas = plan.grid.values();
    let d = cfg.dimension();
    let alpha = cfg.alpha();
    let mc = simulate_grid(cfg, &plan.grid, Strategy::Jumpless, None, plan, TAG_JUMPLESS)?;
    let mut analytic_shift = Vec::new();
    let mut mc_shift = Vec::new();
    for (&l, s) in lambdas.iter().zip(&mc) {
        let c = cfg.with_lambda(l)?;
        let rho = c.rho();
        let exact = mean_turn_deficit(rho, alpha, c.eps())?.value;
        let hist_mean =
            s.deficit_histogram.iter().enumerate().map(|(k, &n)| k as f64 * n as f64).sum::<f64>() / s.reps as f64;
        report.push(Check::within(format!("deficit lambda={l:.4e}"), exact, s.deficit_mean, SE_FACTOR * s.deficit_se));
        let fd = pgf_mean_deficit(rho, alpha, c.eps())?;
        report.push(Check::within(format!("pgf mean lambda={l:.4e}"), fd, hist_mean, SE_FACTOR * s.deficit_se));
        analytic_shift.push(exact - l.log2() / d);
        mc_shift.push(s.deficit_mean - l.log2() / d);
    }
    report.push(Check::at_most("analytic band width", TURN_BAND, band(&analytic_shift), 0.0));
    report.push(Check::at_most("simulated band width", TURN_BAND, band(&mc_shift), 0.0));
    report.push(Check::info("grid decades", plan.grid.decades()));
    Ok(report)
}

/// Jump-over: slope against `-1/d_F`, pointwise dominance over the jumpless mean, and the
/// pole structure of `j*`.
pub fn verify_jumpover(cfg: &CityConfig<f64>, plan: &Plan) -> Result<Report> {
    let mut report = Report::new("jumpover", plan.seed);
    let lambdas = plan.grid.values();
    let target = -1.0 / cfg.dimension();
    let jump = simulate_grid(cfg, &plan.grid, Strategy::JumpOver, None, plan, TAG_JUMPOVER)?;
    let base = simulate_grid(cfg, &plan.grid, Strategy::Jumpless, None, plan, TAG_JUMPLESS)?;
    for ((l, j), b) in lambdas.iter().zip(&jump).zip(&base) {
        let se = (j.se_mean.powi(2) + b.se_mean.powi(2)).sqrt();
        report.push(Check::at_most(format!("dominance lambda={l:.4e}"), b.mean, j.mean, SE_FACTOR * se));
    }
    let fit = fit_scaling_exponent(&points(&lambdas, jump.iter().map(|s| s.mean)), Some(cfg.alpha()))?;
    slope_checks(&mut report, "jump-over mean", &fit, target, MC_SLOPE_TOL);

    let js = JStar::new(cfg.alpha(), 60)?;
    let pole = js.dominant_pole();
    let at = |delta: f64| js.eval(Complex64::new(pole - delta, 0.0)).map(|v| v.value.norm());
    let (far, near) = (at(1e-2)?, at(1e-4)?);
    // a simple pole grows by 100x over two decades; require at least 50x
    report.push(Check::exceeds("j* growth toward pole", 50.0, near / far, 0.0));
    report.push(Check::info("j* dominant pole", pole));
    let one = js.eval(Complex64::new(1.0, 0.0))?.value.norm();
    report.push(Check::at_most("|j*(1)| finite", f64::MAX, one, 0.0));
    Ok(report)
}

/// Large-`u` limit of `log G(u) + beta log u` for gamma weights with shape `beta < 1`.
pub fn gamma_log_g_limit(shape: f64, scale: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (pi / (pi * shape).sin()).ln() - ln_gamma(shape) - shape * scale.ln()
}

/// Modulation: for each law the simulated slope matches `-1/d_F`, simulated means match
/// the modulated formula, and the gamma intercepts differ.
pub fn verify_modulation_theorem(cfg: &CityConfig<f64>, laws: &[ModulationLaw], plan: &Plan) -> Result<Report> {
    let mut report = Report::new("modulation", plan.seed);
    let lambdas = plan.grid.values();
    let target = -1.0 / cfg.dimension();
    let align = Some(cfg.alpha());
    let mut fits = Vec::new();
    for (i, law) in laws.iter().enumerate() {
        let analytic = lambdas
            .iter()
            .map(|&l| {
                let c = cfg.with_lambda(l)?;
                Ok(modulated_mean_distance(&c, law, c.eps())?.value)
            })
            .collect::<Result<Vec<_>>>()?;
        let fit = fit_scaling_exponent(&points(&lambdas, analytic.iter().copied()), align)?;
        report.push(Check::info(format!("{law} analytic slope"), fit.slope));
        let mc = simulate_grid(cfg, &plan.grid, Strategy::Jumpless, Some(*law), plan, TAG_MODULATED + i as u64)?;
        for ((l, a), s) in lambdas.iter().zip(&analytic).zip(&mc) {
            report.push(Check::within(format!("{law} mean lambda={l:.4e}"), *a, s.mean, SE_FACTOR * s.se_mean));
        }
        let fit = fit_scaling_exponent(&points(&lambdas, mc.iter().map(|s| s.mean)), align)?;
        slope_checks(&mut report, &format!("{law} simulated"), &fit, target, MC_SLOPE_TOL);
        fits.push((law, fit));
    }
    let gammas: Vec<_> = fits.iter().filter(|(l, _)| l.has_power_law_small_mass()).collect();
    for (i, (la, fa)) in gammas.iter().enumerate() {
        for (lb, fb) in &gammas[i + 1..] {
            let noise = (fa.intercept_stderr.powi(2) + fb.intercept_stderr.powi(2)).sqrt();
            let gap = (fa.intercept - fb.intercept).abs();
            report.push(Check::exceeds(format!("intercepts {la} vs {lb}"), 0.0, gap, SE_FACTOR * noise));
        }
    }
    for law in laws {
        if let ModulationLaw::Gamma { shape, scale } = *law {
            if shape < 1.0 {
                let vals = [1e2, 1e4, 1e6]
                    .iter()
                    .map(|&u: &f64| Ok(modulated_G(u, law)?.ln() + shape * u.ln()))
                    .collect::<Result<Vec<_>>>()?;
                report.push(Check::at_most(format!("{law} log G + beta log u spread"), 1.0, band(&vals), 0.0));
                report.push(Check::info(format!("{law} log G + beta log u at 1e6"), vals[2]));
                report.push(Check::info(format!("{law} log G + beta log u limit"), gamma_log_g_limit(shape, scale)));
            }
        }
    }
    Ok(report)
}
