//! Log-log growth fits used to tell a diverging gain sequence from a bounded
//! one.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fitted slopes at or above this are called divergent.
pub const DIVERGENT_SLOPE: f64 = 0.9;
/// Fitted slopes at or below this (in magnitude) are called bounded.
pub const BOUNDED_SLOPE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthVerdict {
    Divergent,
    Bounded,
    Inconclusive,
}

impl GrowthVerdict {
    pub fn from_slope(slope: f64) -> Self {
        if slope >= DIVERGENT_SLOPE {
            GrowthVerdict::Divergent
        } else if slope.abs() <= BOUNDED_SLOPE {
            GrowthVerdict::Bounded
        } else {
            GrowthVerdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    /// Exponent `p` in `|v| ~ c n^p`.
    pub slope: f64,
    /// `ln c`.
    pub intercept: f64,
    pub verdict: GrowthVerdict,
}

/// Checks that a population grid is usable for a fit.
pub fn validate_grid(grid: &[usize]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 grid points, got {}", grid.len())));
    }
    if grid[0] == 0 {
        return Err(Error::InvalidArgument("grid points must be >= 1".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Least-squares fit of `ln|v|` against `ln n`.
pub fn fit_growth(points: &[(usize, f64)]) -> Result<GrowthFit> {
    let grid: Vec<usize> = points.iter().map(|p| p.0).collect();
    validate_grid(&grid)?;
    if let Some((n, _)) = points.iter().find(|(_, v)| !(v.is_finite() && *v != 0.0)) {
        return Err(Error::InvalidArgument(format!("value at n = {n} is zero or not finite")));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.abs().ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(GrowthFit { slope, intercept: my - slope * mx, verdict: GrowthVerdict::from_slope(slope) })
}

/// Smallest constant `C` with `|err_n| <= C / n` on the grid, and the
/// log-log slope of the errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub constant: f64,
    pub slope: f64,
}

pub fn fit_inverse_rate(errors: &[(usize, f64)]) -> Result<RateFit> {
    let fit = fit_growth(errors)?;
    let constant = errors.iter().map(|(n, e)| e.abs() * *n as f64).fold(0.0, f64::max);
    Ok(RateFit { constant, slope: fit.slope })
}
