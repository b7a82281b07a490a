//! The evaluation suite: MAE, Kaplan-Meier, IPCW Brier/IBS, concordance
//! indices, censored D-calibration, and calibration curves with OLS
//! summaries.

mod brier;
mod calibration;
mod concordance;
mod km;

pub use brier::{brier_score, ibs, IpcwScore};
pub use calibration::{calibration_curve, cens_dcal, CalibrationVersion};
pub use concordance::{harrells_c, unos_c};
pub use km::{censoring_kaplan_meier, kaplan_meier, StepSurvivalCurve};

use serde::{Deserialize, Serialize};

use crate::data::SurvivalRecord;
use crate::distributions::AldParams;
use crate::error::{Error, Result};

/// A per-record predicted distribution as seen by the metrics: its CDF, its
/// quantile function, and the upper end of its support (finite only for
/// discrete-quantile models).
pub trait CdfAdapter {
    fn cdf(&self, t: f64) -> f64;
    fn quantile(&self, q: f64) -> Result<f64>;
    fn upper_support(&self) -> f64 {
        f64::INFINITY
    }
}

/// Closed-form ALD adapter, used directly by tests and by the model layer.
#[derive(Debug, Clone, Copy)]
pub struct AldCdfAdapter(pub AldParams);

impl CdfAdapter for AldCdfAdapter {
    fn cdf(&self, t: f64) -> f64 {
        self.0.cdf(t)
    }
    fn quantile(&self, q: f64) -> Result<f64> {
        self.0.quantile(q)
    }
}

/// The nine reported quantities for one model on one test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub ibs: f64,
    pub harrell_c: f64,
    pub uno_c: f64,
    pub censdcal: f64,
    pub cal_s_slope: f64,
    pub cal_s_intercept: f64,
    pub cal_f_slope: f64,
    pub cal_f_intercept: f64,
}

impl MetricReport {
    pub fn is_finite(&self) -> bool {
        [
            self.mae,
            self.ibs,
            self.harrell_c,
            self.uno_c,
            self.censdcal,
            self.cal_s_slope,
            self.cal_s_intercept,
            self.cal_f_slope,
            self.cal_f_intercept,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Mean absolute error between point predictions and targets. Synthetic mode
/// compares against the uncensored ground-truth time for every record; real
/// mode restricts to observed events and compares against `y`.
pub fn mae(predictions: &[f64], records: &[SurvivalRecord], synthetic: bool) -> Result<f64> {
    if predictions.len() != records.len() {
        return Err(Error::LengthMismatch(format!(
            "{} predictions vs {} records",
            predictions.len(),
            records.len()
        )));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (pred, rec) in predictions.iter().zip(records) {
        let target = if synthetic {
            Some(rec.o_true.ok_or_else(|| {
                Error::Data("synthetic MAE requires ground-truth times".into())
            })?)
        } else if rec.event {
            Some(rec.y)
        } else {
            None
        };
        if let Some(t) = target {
            total += (pred - t).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Empty(
            "MAE has no effective records (all censored?)".into(),
        ));
    }
    Ok(total / count as f64)
}

/// Ordinary least squares fit of `y = slope * x + intercept`.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Data("OLS needs at least two points".into()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Data("OLS abscissae are degenerate".into()));
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" convention); input must be sorted ascending.
pub(crate) fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sorted-input percentile helper for diagnostics.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("percentile of empty slice".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(quantile_type7(&sorted, q))
}
