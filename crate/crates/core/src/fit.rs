//! Least-squares slopes for log-log scaling experiments.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Largest absolute residual of the fitted line.
    pub residual_max: f64,
    pub sample_points: Vec<(f64, f64)>,
}

impl FitResult {
    /// Ordinary least squares of `y` on `x`.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return domain("a fit needs at least two points");
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return domain("fit points must be finite");
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::DegenerateFit("all abscissae coincide".into()));
        }
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residuals: Vec<f64> = points.iter().map(|p| p.1 - intercept - slope * p.0).collect();
        let rss: f64 = residuals.iter().map(|r| r * r).sum();
        let slope_stderr = if points.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
        let residual_max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        Ok(Self { slope, intercept, slope_stderr, residual_max, sample_points: points })
    }

    /// Fit of `log₂ y` against `log₂ x`; every value must be positive.
    pub fn log_log(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return domain("abscissa and ordinate lengths differ");
        }
        if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
            return domain("log-log fits need positive values");
        }
        Self::from_points(xs.iter().zip(ys).map(|(x, y)| (x.log2(), y.log2())).collect())
    }

    pub fn refit(&self) -> Result<Self> {
        Self::from_points(self.sample_points.clone())
    }
}

fn check_ladder_len(len: usize) -> Result<()> {
    if len < 4 {
        return domain(format!("ladders need at least 4 rungs, got {len}"));
    }
    Ok(())
}

/// Slope of `log₂ f(N)` against `log₂ N` over a geometric ladder.
pub fn exponent_fit_over_n<F>(ladder: &[u64], mut f: F) -> Result<FitResult>
where
    F: FnMut(u64) -> Result<f64>,
{
    check_ladder_len(ladder.len())?;
    if ladder.contains(&0) {
        return domain("ladder values must be positive");
    }
    let ratio = ladder[1] as f64 / ladder[0] as f64;
    let geometric = ratio > 1.0
        && ladder.windows(2).all(|w| ((w[1] as f64 / w[0] as f64) / ratio - 1.0).abs() < 1e-9);
    if !geometric {
        return domain(format!("N ladder {ladder:?} is not geometric"));
    }
    let xs: Vec<f64> = ladder.iter().map(|&n| n as f64).collect();
    let ys = ladder.iter().map(|&n| f(n)).collect::<Result<Vec<f64>>>()?;
    FitResult::log_log(&xs, &ys)
}

/// Slope of `log₂ f(j)` against `j` over an arithmetic ladder of dyadic
/// levels (geometric in the side `2^{-j}`).
pub fn exponent_fit_over_j<F>(ladder: &[u32], mut f: F) -> Result<FitResult>
where
    F: FnMut(u32) -> Result<f64>,
{
    check_ladder_len(ladder.len())?;
    let step = ladder[1] as i64 - ladder[0] as i64;
    if step <= 0 || ladder.windows(2).any(|w| w[1] as i64 - w[0] as i64 != step) {
        return domain(format!("j ladder {ladder:?} is not evenly spaced"));
    }
    let mut pts = Vec::with_capacity(ladder.len());
    for &j in ladder {
        let v = f(j)?;
        if !(v > 0.0) {
            return domain(format!("nonpositive value {v} at j={j}"));
        }
        pts.push((j as f64, v.log2()));
    }
    FitResult::from_points(pts)
}
