//! Uniform CDF/quantile adapters over predicted distribution payloads.

use crate::distributions::{AldParams, LogNormParams};
use crate::error::{Error, Result};
use crate::metrics::CdfAdapter;

/// A per-record predicted event-time distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictedDistribution {
    Ald(AldParams),
    LogNorm(LogNormParams),
    /// Discrete quantile predictions `(grid[i], values[i])` with values
    /// rearranged to be nondecreasing, plus the pseudo upper value.
    Quantiles {
        grid: Vec<f64>,
        values: Vec<f64>,
        y_star: f64,
    },
}

impl PredictedDistribution {
    /// Interpolated CDF for the quantile payload: 0 below the first knot,
    /// piecewise linear through the knots, then linear from the last knot up
    /// to 1 at `y_star`.
    fn quantile_cdf(grid: &[f64], values: &[f64], y_star: f64, t: f64) -> f64 {
        let k = values.len();
        if t < values[0] {
            return 0.0;
        }
        // Walk segments; ties between knots act as jumps (upper value wins).
        let mut level = grid[0];
        for i in 0..k - 1 {
            if t >= values[i + 1] {
                level = grid[i + 1];
                continue;
            }
            // values[i] <= t < values[i+1]
            let width = values[i + 1] - values[i];
            return if width > 0.0 {
                grid[i] + (grid[i + 1] - grid[i]) * (t - values[i]) / width
            } else {
                grid[i + 1]
            };
        }
        if t >= y_star {
            return 1.0;
        }
        let width = y_star - values[k - 1];
        if width > 0.0 {
            level + (1.0 - level) * (t - values[k - 1]) / width
        } else {
            1.0
        }
    }

    fn quantile_inverse(grid: &[f64], values: &[f64], y_star: f64, q: f64) -> f64 {
        let k = values.len();
        if q <= grid[0] {
            return values[0];
        }
        for i in 0..k - 1 {
            if q <= grid[i + 1] {
                let span = grid[i + 1] - grid[i];
                return values[i] + (values[i + 1] - values[i]) * (q - grid[i]) / span;
            }
        }
        if y_star > values[k - 1] {
            values[k - 1] + (y_star - values[k - 1]) * (q - grid[k - 1]) / (1.0 - grid[k - 1])
        } else {
            values[k - 1]
        }
    }
}

impl CdfAdapter for PredictedDistribution {
    fn cdf(&self, t: f64) -> f64 {
        match self {
            PredictedDistribution::Ald(p) => p.cdf(t),
            PredictedDistribution::LogNorm(p) => p.cdf(t),
            PredictedDistribution::Quantiles {
                grid,
                values,
                y_star,
            } => Self::quantile_cdf(grid, values, *y_star, t),
        }
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile requires q in (0,1), got {q}")));
        }
        match self {
            PredictedDistribution::Ald(p) => p.quantile(q),
            PredictedDistribution::LogNorm(p) => p.quantile(q),
            PredictedDistribution::Quantiles {
                grid,
                values,
                y_star,
            } => Ok(Self::quantile_inverse(grid, values, *y_star, q)),
        }
    }

    fn upper_support(&self) -> f64 {
        match self {
            PredictedDistribution::Quantiles { values, y_star, .. } => {
                y_star.max(*values.last().unwrap())
            }
            _ => f64::INFINITY,
        }
    }
}
