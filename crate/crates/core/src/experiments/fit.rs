use serde::Serialize;

use crate::error::{Error, Result};

/// Geometric grid `anchor * ratio^n`, `n = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub anchor: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(anchor: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(anchor > 0.0 && anchor.is_finite()) || !(ratio > 0.0 && ratio.is_finite()) || ratio == 1.0 || count == 0 {
            return Err(Error::DegenerateGrid(format!("anchor {anchor}, ratio {ratio}, count {count}")));
        }
        Ok(Self { anchor, ratio, count })
    }

    /// `count` points spaced by one log-period `1/alpha`.
    pub fn period_aligned(anchor: f64, alpha: f64, count: usize) -> Result<Self> {
        Self::new(anchor, 1.0 / alpha, count)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|n| self.anchor * self.ratio.powi(n as i32)).collect()
    }

    /// Decades spanned by the grid.
    pub fn decades(&self) -> f64 {
        (self.count.saturating_sub(1)) as f64 * self.ratio.log10().abs()
    }
}

/// Least-squares fit of `ln value = intercept + slope ln lambda`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Largest absolute residual in log space.
    pub residual_amplitude: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub grid: Vec<f64>,
}

const ALIGN_TOL: f64 = 1e-9;

/// Fits a power law to `(lambda, value)` points.
///
/// With `align = Some(alpha)` consecutive grid ratios must all equal `1/alpha`, so a
/// log-periodic term of period `|ln alpha|` takes the same value at every point and only
/// shifts the intercept.
pub fn fit_scaling_exponent(points: &[(f64, f64)], align: Option<f64>) -> Result<ExponentFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateGrid(format!("{} points, need at least 4", points.len())));
    }
    if let Some((l, v)) = points.iter().find(|(l, v)| !(*l > 0.0 && *v > 0.0 && l.is_finite() && v.is_finite())) {
        return Err(Error::DegenerateGrid(format!("point ({l}, {v}) is not strictly positive")));
    }
    if let Some(alpha) = align {
        let want = -alpha.ln();
        for w in points.windows(2) {
            let step = (w[1].0 / w[0].0).ln();
            if (step - want).abs() > ALIGN_TOL * want {
                return Err(Error::DegenerateGrid(format!("grid step {step} is not the log-period {want}")));
            }
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateGrid("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let s2 = sse / (n - 2.0);
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        residual_amplitude: residuals.iter().fold(0.0, |a, r| a.max(r.abs())),
        slope_stderr: (s2 / sxx).sqrt(),
        intercept_stderr: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
        grid: points.iter().map(|p| p.0).collect(),
    })
}
