//! Censored D-calibration and the two calibration-curve variants.
//!
//! Observed records are binned by comparing the observed time against the
//! record's own predicted quantiles. A censored record with censoring
//! quantile `u = F(c | x)` is redistributed over the intervals above `u`:
//! mass `(b - u) / (1 - u)` in the interval containing `u` and
//! `(b - a) / (1 - u)` in each later interval `(a, b]`.

use super::CdfAdapter;
use crate::data::SurvivalRecord;
use crate::error::{Error, Result};

/// Fractional mass a censored record with censoring PIT `u` places in the
/// probability interval `(a, b]`.
fn censored_mass(u: f64, a: f64, b: f64) -> f64 {
    let u = u.clamp(0.0, 1.0 - 1e-12);
    (b.min(1.0) - a.max(u)).max(0.0) / (1.0 - u)
}

/// Decile index (0..=9) an observed time lands in, by comparing against the
/// record's predicted quantiles at 0.1..0.9. Boundary deciles extend to the
/// full support, so every record lands somewhere.
fn observed_decile<A: CdfAdapter>(adapter: &A, y: f64) -> Result<usize> {
    let mut j = 0;
    for k in 1..=9 {
        if adapter.quantile(k as f64 / 10.0)? < y {
            j = k;
        }
    }
    Ok(j)
}

/// Censored D-calibration: `100 * sum_j (0.1 - zeta_j / N)^2` over the ten
/// decile intervals.
pub fn cens_dcal<A: CdfAdapter>(adapters: &[A], records: &[SurvivalRecord]) -> Result<f64> {
    if adapters.len() != records.len() {
        return Err(Error::LengthMismatch(format!(
            "{} adapters vs {} records",
            adapters.len(),
            records.len()
        )));
    }
    if records.is_empty() {
        return Err(Error::Empty("cens_dcal needs records".into()));
    }
    let mut zeta = [0.0; 10];
    for (rec, adapter) in records.iter().zip(adapters) {
        if rec.event {
            zeta[observed_decile(adapter, rec.y)?] += 1.0;
        } else {
            let u = adapter.cdf(rec.y);
            for (j, z) in zeta.iter_mut().enumerate() {
                *z += censored_mass(u, j as f64 / 10.0, (j + 1) as f64 / 10.0);
            }
        }
    }
    let n = records.len() as f64;
    Ok(100.0 * zeta.iter().map(|z| (0.1 - z / n).powi(2)).sum::<f64>())
}

/// Which calibration curve to build: cumulative survival-style intervals or
/// centered density-style intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationVersion {
    Survival,
    Density,
}

/// Ten `(target, observed)` calibration points.
///
/// Survival version: targets `0.1 j` with observed = proportion of records at
/// or below their predicted `0.1 j` quantile (censored mass redistributed).
/// Density version: targets are centered interval widths `0.1 j`, observed =
/// proportion inside `[0.5 - j/20, 0.5 + j/20]`, the outermost interval being
/// the whole unit range.
pub fn calibration_curve<A: CdfAdapter>(
    adapters: &[A],
    records: &[SurvivalRecord],
    version: CalibrationVersion,
) -> Result<Vec<(f64, f64)>> {
    if adapters.len() != records.len() {
        return Err(Error::LengthMismatch(format!(
            "{} adapters vs {} records",
            adapters.len(),
            records.len()
        )));
    }
    if records.is_empty() {
        return Err(Error::Empty("calibration_curve needs records".into()));
    }
    let n = records.len() as f64;
    let mut points = Vec::with_capacity(10);
    for j in 1..=10 {
        let target = j as f64 / 10.0;
        let (lo, hi) = match version {
            CalibrationVersion::Survival => (0.0, target),
            CalibrationVersion::Density => {
                if j == 10 {
                    (0.0, 1.0)
                } else {
                    (0.5 - j as f64 / 20.0, 0.5 + j as f64 / 20.0)
                }
            }
        };
        let mut mass = 0.0;
        for (rec, adapter) in records.iter().zip(adapters) {
            if rec.event {
                let above_lo = if lo <= 0.0 {
                    true
                } else {
                    rec.y > adapter.quantile(lo)?
                };
                let below_hi = if hi >= 1.0 {
                    rec.y <= adapter.upper_support()
                } else {
                    rec.y <= adapter.quantile(hi)?
                };
                if above_lo && below_hi {
                    mass += 1.0;
                }
            } else {
                mass += censored_mass(adapter.cdf(rec.y), lo, hi);
            }
        }
        points.push((target, mass / n));
    }
    Ok(points)
}
