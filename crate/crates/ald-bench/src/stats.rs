//! Two-sample t-tests and Benjamini-Hochberg FDR control for the method
//! comparisons.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use ald_survival::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestKind {
    /// Unequal-variance (Welch) test, the default.
    Welch,
    /// Pooled-variance Student test.
    Student,
}

impl TTestKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "welch" => Ok(TTestKind::Welch),
            "student" => Ok(TTestKind::Student),
            other => Err(Error::InvalidParameter(format!("unknown t-test '{other}'"))),
        }
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided two-sample t-test p-value. Degenerate samples (both variances
/// zero) give p = 1 when the means agree and p = 0 otherwise.
pub fn t_test(a: &[f64], b: &[f64], kind: TTestKind) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Data(
            "t-test needs at least two observations per sample".into(),
        ));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == 0.0 && vb == 0.0 {
        return Ok(if ma == mb { 1.0 } else { 0.0 });
    }
    let (t, df) = match kind {
        TTestKind::Welch => {
            let se2 = va / na + vb / nb;
            let df = se2 * se2
                / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
            ((ma - mb) / se2.sqrt(), df)
        }
        TTestKind::Student => {
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            let se = (pooled * (1.0 / na + 1.0 / nb)).sqrt();
            ((ma - mb) / se, na + nb - 2.0)
        }
    };
    if !t.is_finite() {
        return Ok(0.0);
    }
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidParameter(format!("t distribution: {e}")))?;
    Ok((2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0))
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    t_test(a, b, TTestKind::Welch)
}

/// Benjamini-Hochberg step-up: rejects the hypotheses with the `k` smallest
/// p-values, where `k` is the largest rank with `p_(k) <= alpha * k / m`.
pub fn benjamini_hochberg(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].partial_cmp(&p_values[j]).unwrap());
    let mut cutoff_rank = None;
    for (rank, &idx) in order.iter().enumerate() {
        if p_values[idx] <= alpha * (rank + 1) as f64 / m as f64 {
            cutoff_rank = Some(rank);
        }
    }
    let mut reject = vec![false; m];
    if let Some(k) = cutoff_rank {
        for &idx in &order[..=k] {
            reject[idx] = true;
        }
    }
    reject
}

/// Direction of a significant difference, from the reference method's
/// perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Better,
    Worse,
    Same,
}

/// One (dataset, metric) comparison of the reference method against a
/// baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub dataset: String,
    pub metric: String,
    pub baseline: String,
    pub p_value: f64,
    pub significant: bool,
    pub outcome: Outcome,
    pub reference_mean: f64,
    pub baseline_mean: f64,
}

/// Transform under which lower is better for every metric: error and
/// calibration-distance metrics pass through, concordance is negated, and
/// calibration slope/intercept become distances from the ideal values 1 and 0.
pub fn orient_lower_is_better(metric: &str, value: f64) -> f64 {
    match metric {
        "harrell_c" | "uno_c" => -value,
        "cal_s_slope" | "cal_f_slope" => (1.0 - value).abs(),
        "cal_s_intercept" | "cal_f_intercept" => value.abs(),
        _ => value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_p_one() {
        let a = [0.5, 0.5, 0.5];
        assert_eq!(welch_t_test(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn separated_samples_are_significant() {
        let a: Vec<f64> = (0..10).map(|i| 0.0 + 1e-6 * i as f64).collect();
        let b: Vec<f64> = (0..10).map(|i| 1.0 + 1e-6 * i as f64).collect();
        let p = welch_t_test(&a, &b).unwrap();
        assert!(p < 1e-10, "p = {p}");
    }

    #[test]
    fn p_value_matches_known_case() {
        // Equal-size samples with known statistics; reference p computed from
        // scipy.stats.ttest_ind(equal_var=False).
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let p = welch_t_test(&a, &b).unwrap();
        assert!((p - 0.3465935071).abs() < 1e-6, "p = {p}");
    }

    #[test]
    fn student_matches_known_case() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let p = t_test(&a, &b, TTestKind::Student).unwrap();
        assert!((p - 0.3465935071).abs() < 1e-6, "p = {p}");
    }

    #[test]
    fn too_few_observations_is_error() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn bh_hand_case_all_rejected() {
        let p = [0.01, 0.02, 0.03, 0.04];
        let rejected = benjamini_hochberg(&p, 0.05);
        assert_eq!(rejected, vec![true; 4]);
    }

    #[test]
    fn bh_step_up_partial() {
        // Ranks: 0.01 <= 0.05/4? yes. 0.04 <= 0.025? no. 0.049 <= 0.0375? no.
        // 0.2 <= 0.05? no. Largest passing rank is 1, so only 0.01 rejects.
        let p = [0.04, 0.01, 0.2, 0.049];
        let rejected = benjamini_hochberg(&p, 0.05);
        assert_eq!(rejected, vec![false, true, false, false]);
    }

    #[test]
    fn bh_matches_brute_force_on_random_vectors() {
        // Brute force: reject H_(i) iff there exists k >= rank(i) with
        // p_(k) <= alpha k / m.
        let mut state = 0x853c49e6748fea9bu64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / (1u64 << 53) as f64
        };
        for trial in 0..1000 {
            let m = 1 + (next() * 12.0) as usize;
            let p: Vec<f64> = (0..m).map(|_| next()).collect();
            let alpha = 0.01 + next() * 0.2;
            let fast = benjamini_hochberg(&p, alpha);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| p[i].partial_cmp(&p[j]).unwrap());
            let mut slow = vec![false; m];
            for (rank, &idx) in order.iter().enumerate() {
                let any_later = order[rank..].iter().enumerate().any(|(off, &jdx)| {
                    p[jdx] <= alpha * (rank + off + 1) as f64 / m as f64
                });
                slow[idx] = any_later;
            }
            assert_eq!(fast, slow, "trial {trial}: p={p:?} alpha={alpha}");
        }
    }

    #[test]
    fn bh_monotone_under_lowering() {
        // Lowering one p-value never un-rejects another hypothesis.
        let mut state = 99u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64) / (1u64 << 53) as f64
        };
        for _ in 0..300 {
            let m = 2 + (next() * 10.0) as usize;
            let p: Vec<f64> = (0..m).map(|_| next()).collect();
            let before = benjamini_hochberg(&p, 0.05);
            let target = (next() * m as f64) as usize;
            let mut lowered = p.clone();
            lowered[target] *= next();
            let after = benjamini_hochberg(&lowered, 0.05);
            for i in 0..m {
                if i != target && before[i] {
                    assert!(after[i], "lowering p[{target}] un-rejected {i}");
                }
            }
        }
    }

    #[test]
    fn orientation_transforms() {
        assert_eq!(orient_lower_is_better("mae", 0.3), 0.3);
        assert_eq!(orient_lower_is_better("harrell_c", 0.7), -0.7);
        assert!((orient_lower_is_better("cal_s_slope", 1.2) - 0.2).abs() < 1e-15);
        assert!((orient_lower_is_better("cal_f_intercept", -0.1) - 0.1).abs() < 1e-15);
    }
}
