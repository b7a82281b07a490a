//! Harrell's and Uno's concordance indices.
//!
//! Comparable pairs are `(i, j)` with `y_i < y_j` and `e_i = 1`; tied risk
//! scores earn half credit. Risk scores are oriented so that higher risk
//! should accompany shorter survival. Uno's variant weights each anchor
//! record by `G(y_i-)^-2` from the training censoring curve and restricts
//! anchors to `y_i < tau`.

use super::km::StepSurvivalCurve;
use crate::error::{Error, Result};

fn check_lengths(risk: &[f64], times: &[f64], events: &[bool]) -> Result<()> {
    if risk.len() != times.len() || times.len() != events.len() {
        return Err(Error::LengthMismatch(format!(
            "risk {}, times {}, events {}",
            risk.len(),
            times.len(),
            events.len()
        )));
    }
    Ok(())
}

pub fn harrells_c(risk: &[f64], times: &[f64], events: &[bool]) -> Result<f64> {
    check_lengths(risk, times, events)?;
    let n = times.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        if !events[i] {
            continue;
        }
        for j in 0..n {
            if i == j || !(times[i] < times[j]) {
                continue;
            }
            den += 1.0;
            if risk[i] > risk[j] {
                num += 1.0;
            } else if risk[i] == risk[j] {
                num += 0.5;
            }
        }
    }
    if den == 0.0 {
        return Err(Error::Data("no comparable pairs".into()));
    }
    Ok(num / den)
}

/// IPCW concordance. Returns the index and the number of anchor records
/// dropped because `G(y_i-)` was zero.
pub fn unos_c(
    risk: &[f64],
    times: &[f64],
    events: &[bool],
    g_train: &StepSurvivalCurve,
    tau: f64,
) -> Result<(f64, usize)> {
    check_lengths(risk, times, events)?;
    let n = times.len();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut skipped = 0usize;
    for i in 0..n {
        if !events[i] || !(times[i] < tau) {
            continue;
        }
        let g = g_train.eval_left(times[i]);
        if g <= 0.0 {
            skipped += 1;
            continue;
        }
        let w = 1.0 / (g * g);
        for j in 0..n {
            if i == j || !(times[i] < times[j]) {
                continue;
            }
            den += w;
            if risk[i] > risk[j] {
                num += w;
            } else if risk[i] == risk[j] {
                num += 0.5 * w;
            }
        }
    }
    if den == 0.0 {
        return Err(Error::Data("no comparable pairs below tau".into()));
    }
    Ok((num / den, skipped))
}
