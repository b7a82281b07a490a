//! Censoring-aware training objectives and their analytic parameter gradients.
//!
//! The observed ALD term is the exact negative log-density of the
//! distribution, constants included, so reported values are true negative
//! log-likelihoods. At the non-differentiable point `y = theta` (and
//! `y = theta_q` for the pinball loss) the `y >= theta` branch derivative is
//! used; minibatch training never lands exactly on the kink in floating point.

use crate::distributions::normal::{std_normal_cdf, std_normal_pdf};
use crate::distributions::{AldParams, LogNormParams};
use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// One record's loss contribution together with its gradient with respect to
/// the `N` distribution parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerm<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
}

/// Negative log-density of an observed event time under the ALD, with
/// gradients in `(theta, sigma, kappa)` order.
pub fn ald_nll_observed(y: f64, p: &AldParams) -> LossTerm<3> {
    let (theta, sigma, kappa) = (p.theta(), p.sigma(), p.kappa());
    let k2p1 = 1.0 + kappa * kappa;
    let value = -p.log_pdf(y);
    let common_kappa = -1.0 / kappa + 2.0 * kappa / k2p1;
    let grad = if y >= theta {
        let u = y - theta;
        [
            -SQRT_2 * kappa / sigma,
            1.0 / sigma - SQRT_2 * kappa * u / (sigma * sigma),
            common_kappa + SQRT_2 * u / sigma,
        ]
    } else {
        let a = theta - y;
        [
            SQRT_2 / (sigma * kappa),
            1.0 / sigma - SQRT_2 * a / (kappa * sigma * sigma),
            common_kappa - SQRT_2 * a / (sigma * kappa * kappa),
        ]
    };
    LossTerm { value, grad }
}

/// Negative log-survival of a censored time under the ALD.
pub fn ald_nll_censored(y: f64, p: &AldParams) -> LossTerm<3> {
    let (theta, sigma, kappa) = (p.theta(), p.sigma(), p.kappa());
    let k2 = kappa * kappa;
    let k2p1 = 1.0 + k2;
    let value = -p.log_survival(y);
    let grad = if y >= theta {
        let u = y - theta;
        [
            -SQRT_2 * kappa / sigma,
            -SQRT_2 * kappa * u / (sigma * sigma),
            2.0 * kappa / k2p1 + SQRT_2 * u / sigma,
        ]
    } else {
        let a = theta - y;
        let e = (-SQRT_2 * a / (sigma * kappa)).exp();
        let d = 1.0 + k2 * (1.0 - e);
        [
            -SQRT_2 * kappa * e / (sigma * d),
            SQRT_2 * kappa * a * e / (sigma * sigma * d),
            2.0 * kappa / k2p1 - (2.0 * kappa * (1.0 - e) - SQRT_2 * a * e / sigma) / d,
        ]
    };
    LossTerm { value, grad }
}

/// How a batch total is reduced: `Sum` for reporting, `Mean` for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Sum,
    Mean,
}

/// Censoring-aware ALD batch loss: observed records contribute the negative
/// log-density, censored records the negative log-survival. Returns the
/// reduced total and the raw per-record terms (the caller scales gradients by
/// `1/n` under mean reduction).
pub fn ald_batch_loss(
    records: &[(f64, bool)],
    params: &[AldParams],
    reduction: Reduction,
) -> Result<(f64, Vec<LossTerm<3>>)> {
    if records.len() != params.len() {
        return Err(Error::LengthMismatch(format!(
            "{} records vs {} parameter triples",
            records.len(),
            params.len()
        )));
    }
    let terms: Vec<LossTerm<3>> = records
        .iter()
        .zip(params)
        .map(|(&(y, event), p)| {
            if event {
                ald_nll_observed(y, p)
            } else {
                ald_nll_censored(y, p)
            }
        })
        .collect();
    let mut total: f64 = terms.iter().map(|t| t.value).sum();
    if reduction == Reduction::Mean && !terms.is_empty() {
        total /= terms.len() as f64;
    }
    Ok((total, terms))
}

/// Pinball (checkmark) loss `(y - theta_q) * (q - 1[theta_q > y])`.
pub fn pinball_loss(y: f64, theta_q: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "pinball loss requires q in (0,1), got {q}"
        )));
    }
    let indicator = if theta_q > y { 1.0 } else { 0.0 };
    Ok((y - theta_q) * (q - indicator))
}

/// Derivative of the pinball loss with respect to `theta_q`; the `y >= theta_q`
/// branch applies at the kink.
pub fn pinball_grad(y: f64, theta_q: f64, q: f64) -> f64 {
    if theta_q > y {
        1.0 - q
    } else {
        -q
    }
}

/// Portnoy re-weighting factor `(q - q_c) / (1 - q_c)`, clamped to `[0, 1]`.
pub fn portnoy_weight(q: f64, q_c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q_c) {
        return Err(Error::Domain(format!(
            "censoring quantile must lie in [0,1), got {q_c}"
        )));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q must lie in (0,1), got {q}")));
    }
    Ok(((q - q_c) / (1.0 - q_c)).clamp(0.0, 1.0))
}

/// Censored quantile-regression loss: the censored observation is split
/// between its censoring time `y` and the pseudo value `y_star`.
pub fn cqr_censored_loss(y: f64, y_star: f64, theta_q: f64, q: f64, w: f64) -> Result<f64> {
    Ok(w * pinball_loss(y, theta_q, q)? + (1.0 - w) * pinball_loss(y_star, theta_q, q)?)
}

/// Gradient of [`cqr_censored_loss`] with respect to `theta_q`.
pub fn cqr_censored_grad(y: f64, y_star: f64, theta_q: f64, q: f64, w: f64) -> f64 {
    w * pinball_grad(y, theta_q, q) + (1.0 - w) * pinball_grad(y_star, theta_q, q)
}

/// Log-normal MLE loss: negative log-density for observed records, negative
/// log-survival for censored ones, with gradients in `(mu, eta)` order.
pub fn lognorm_nll(y: f64, event: bool, p: &LogNormParams) -> Result<LossTerm<2>> {
    if y <= 0.0 {
        return Err(Error::Data(format!(
            "log-normal loss requires y > 0, got {y}"
        )));
    }
    let (mu, eta) = (p.mu(), p.eta());
    let z = (y.ln() - mu) / eta;
    if event {
        let value = y.ln() + eta.ln() + 0.5 * (2.0 * std::f64::consts::PI).ln() + 0.5 * z * z;
        Ok(LossTerm {
            value,
            grad: [-z / eta, 1.0 / eta - z * z / eta],
        })
    } else {
        let survival = std_normal_cdf(-z);
        let value = -survival.ln();
        // Normal hazard phi(z) / (1 - Phi(z)).
        let hazard = std_normal_pdf(z) / survival;
        Ok(LossTerm {
            value,
            grad: [-hazard / eta, -hazard * z / eta],
        })
    }
}
