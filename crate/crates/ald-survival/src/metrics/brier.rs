//! IPCW Brier score and its time integral.

use super::km::StepSurvivalCurve;
use super::{quantile_type7, CdfAdapter};
use crate::data::SurvivalRecord;
use crate::error::{Error, Result};

/// An inverse-probability-weighted score plus the number of record terms
/// dropped because the censoring survival evaluated to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpcwScore {
    pub value: f64,
    pub skipped: usize,
}

/// Two-term IPCW Brier score at time `t`: the event term weights
/// `(1 - F(t))^2` by `1[y <= t, e = 1] / G(y-)` and the at-risk term weights
/// `F(t)^2` by `1[y > t] / G(t)`. `g` is the Kaplan-Meier censoring survival
/// estimated from training data.
pub fn brier_score<A: CdfAdapter>(
    t: f64,
    records: &[SurvivalRecord],
    adapters: &[A],
    g: &StepSurvivalCurve,
) -> Result<IpcwScore> {
    if records.len() != adapters.len() {
        return Err(Error::LengthMismatch(format!(
            "{} records vs {} adapters",
            records.len(),
            adapters.len()
        )));
    }
    if records.is_empty() {
        return Err(Error::Empty("brier_score needs records".into()));
    }
    let mut total = 0.0;
    let mut skipped = 0usize;
    for (rec, adapter) in records.iter().zip(adapters) {
        let f_t = adapter.cdf(t);
        if rec.y <= t && rec.event {
            let w = g.eval_left(rec.y);
            if w > 0.0 {
                let s = 1.0 - f_t;
                total += s * s / w;
            } else {
                skipped += 1;
            }
        } else if rec.y > t {
            let w = g.eval(t);
            if w > 0.0 {
                total += f_t * f_t / w;
            } else {
                skipped += 1;
            }
        }
    }
    Ok(IpcwScore {
        value: total / records.len() as f64,
        skipped,
    })
}

/// Integrated Brier score: trapezoidal average of `BS(t)` over 100 evenly
/// spaced times between the 0.1 and 0.9 empirical quantiles of the training
/// observed-time distribution, normalized by the interval length.
pub fn ibs<A: CdfAdapter>(
    records: &[SurvivalRecord],
    adapters: &[A],
    g: &StepSurvivalCurve,
    train_times: &[f64],
) -> Result<IpcwScore> {
    if train_times.is_empty() {
        return Err(Error::Empty("ibs needs training times".into()));
    }
    let mut sorted = train_times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let t1 = quantile_type7(&sorted, 0.1);
    let t2 = quantile_type7(&sorted, 0.9);
    if !(t2 > t1) {
        return Err(Error::Data(format!(
            "degenerate integration interval [{t1}, {t2}]"
        )));
    }
    const POINTS: usize = 100;
    let mut scores = Vec::with_capacity(POINTS);
    let mut skipped = 0usize;
    for i in 0..POINTS {
        let t = t1 + (t2 - t1) * i as f64 / (POINTS - 1) as f64;
        let bs = brier_score(t, records, adapters, g)?;
        skipped += bs.skipped;
        scores.push(bs.value);
    }
    // Even spacing: the trapezoid rule reduces to half-weighted endpoints.
    let inner: f64 = scores[1..POINTS - 1].iter().sum();
    let value = (0.5 * scores[0] + inner + 0.5 * scores[POINTS - 1]) / (POINTS - 1) as f64;
    Ok(IpcwScore { value, skipped })
}
