//! Least-squares decay rates on log-log axes.

use crate::error::{Error, Result};

/// Residuals at or below this are treated as exact zeros and left out of fits.
pub const ZERO_GUARD: f64 = 1e-12;
pub const MIN_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Fits `log r = intercept + slope log k` over the points with
/// `r > ZERO_GUARD`.
pub fn fit_rate(ks: &[u32], residuals: &[f64]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > ZERO_GUARD && r.is_finite())
        .map(|(k, r)| ((*k as f64).ln(), r.ln()))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            usable: pts.len(),
            needed: MIN_POINTS,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("rate fit needs distinct k".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        slope,
        intercept,
        r2,
        points: pts.len(),
    })
}
