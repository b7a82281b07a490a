//! Kaplan-Meier product-limit estimation and step-curve evaluation.

use crate::error::{Error, Result};

/// A right-continuous survival step function: value 1 before the first step
/// time, changing at each recorded time. Evaluation at `t` returns the value
/// at the largest step time `<= t`; the left-limit variant uses `< t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSurvivalCurve {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl StepSurvivalCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch(format!(
                "{} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "step times must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(
                "survival values must lie in [0,1]".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(Error::InvalidParameter(
                "survival values must be nonincreasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// S(t): value at the largest step time `<= t`, 1 before the first.
    pub fn eval(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 1.0,
            k => self.values[k - 1],
        }
    }

    /// S(t-): value at the largest step time strictly `< t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x < t) {
            0 => 1.0,
            k => self.values[k - 1],
        }
    }
}

/// Product-limit estimator. Steps are recorded only at times with at least
/// one event; ties between events and censorings at one time treat the
/// censored subjects as still at risk for that time's factor.
pub fn kaplan_meier(times: &[f64], events: &[bool]) -> Result<StepSurvivalCurve> {
    if times.is_empty() {
        return Err(Error::Empty("kaplan_meier needs at least one record".into()));
    }
    if times.len() != events.len() {
        return Err(Error::LengthMismatch(format!(
            "{} times vs {} events",
            times.len(),
            events.len()
        )));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());

    let mut step_times = Vec::new();
    let mut step_values = Vec::new();
    let mut at_risk = times.len();
    let mut survival = 1.0;
    let mut i = 0;
    while i < order.len() {
        let t = times[order[i]];
        let mut deaths = 0usize;
        let mut leaving = 0usize;
        while i < order.len() && times[order[i]] == t {
            if events[order[i]] {
                deaths += 1;
            }
            leaving += 1;
            i += 1;
        }
        if deaths > 0 {
            survival *= 1.0 - deaths as f64 / at_risk as f64;
            step_times.push(t);
            step_values.push(survival.max(0.0));
        }
        at_risk -= leaving;
    }
    StepSurvivalCurve::new(step_times, step_values)
}

/// Kaplan-Meier estimate of the censoring survival function, obtained by
/// flipping the event indicator.
pub fn censoring_kaplan_meier(times: &[f64], events: &[bool]) -> Result<StepSurvivalCurve> {
    let flipped: Vec<bool> = events.iter().map(|e| !e).collect();
    kaplan_meier(times, &flipped)
}
