//! Asymmetric Laplace distribution: density, CDF, survival, quantiles, moments.
//!
//! The distribution has exponential tails with rate `sqrt(2)*kappa/sigma` to the
//! right of the location `theta` and `sqrt(2)/(sigma*kappa)` to the left. The
//! log-domain forms are primary; linear-domain pdf and survival are thin
//! exponentials of them so extreme observations do not underflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Location/scale/asymmetry triple `(theta, sigma, kappa)` with `sigma > 0`,
/// `kappa > 0`, all finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AldParams {
    theta: f64,
    sigma: f64,
    kappa: f64,
}

impl AldParams {
    pub fn new(theta: f64, sigma: f64, kappa: f64) -> Result<Self> {
        if !theta.is_finite() || !sigma.is_finite() || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ALD parameters must be finite, got ({theta}, {sigma}, {kappa})"
            )));
        }
        if sigma <= 0.0 || kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ALD requires sigma > 0 and kappa > 0, got sigma={sigma}, kappa={kappa}"
            )));
        }
        Ok(Self {
            theta,
            sigma,
            kappa,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// CDF value at the location: `kappa^2 / (1 + kappa^2)`. This is also the
    /// quantile level at which the piecewise formulas switch branches.
    pub fn branch_prob(&self) -> f64 {
        let k2 = self.kappa * self.kappa;
        k2 / (1.0 + k2)
    }

    /// Log-density. Both branches agree at `y = theta`; the `y >= theta`
    /// branch is used there.
    pub fn log_pdf(&self, y: f64) -> f64 {
        let k2p1 = 1.0 + self.kappa * self.kappa;
        let base = 0.5 * std::f64::consts::LN_2 - self.sigma.ln() + self.kappa.ln() - k2p1.ln();
        let expo = if y >= self.theta {
            -SQRT_2 * self.kappa / self.sigma * (y - self.theta)
        } else {
            -SQRT_2 / (self.sigma * self.kappa) * (self.theta - y)
        };
        base + expo
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.log_pdf(y).exp()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let k2 = self.kappa * self.kappa;
        if y >= self.theta {
            1.0 - (-SQRT_2 * self.kappa / self.sigma * (y - self.theta)).exp() / (1.0 + k2)
        } else {
            k2 / (1.0 + k2) * (SQRT_2 / (self.sigma * self.kappa) * (y - self.theta)).exp()
        }
    }

    /// Log survival function, evaluated in the log domain so large `y` keep
    /// precision instead of collapsing through `1 - cdf`.
    pub fn log_survival(&self, y: f64) -> f64 {
        let k2 = self.kappa * self.kappa;
        if y >= self.theta {
            -SQRT_2 * self.kappa / self.sigma * (y - self.theta) - (1.0 + k2).ln()
        } else {
            let e = (SQRT_2 / (self.sigma * self.kappa) * (y - self.theta)).exp();
            (k2 * (1.0 - e)).ln_1p() - k2.ln_1p()
        }
    }

    pub fn survival(&self, y: f64) -> f64 {
        self.log_survival(y).exp()
    }

    /// Quantile for `q` in (0, 1); piecewise-logarithmic with the switch at
    /// `branch_prob()`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!(
                "ALD quantile requires q in (0,1), got {q}"
            )));
        }
        let k2 = self.kappa * self.kappa;
        let k2p1 = 1.0 + k2;
        if q <= self.branch_prob() {
            Ok(self.theta + self.sigma * self.kappa / SQRT_2 * (k2p1 * q / k2).ln())
        } else {
            Ok(self.theta - self.sigma / (SQRT_2 * self.kappa) * (k2p1 * (1.0 - q)).ln())
        }
    }

    /// Mean `theta + sigma/sqrt(2) * (1/kappa - kappa)`.
    pub fn mean(&self) -> f64 {
        self.theta + self.sigma / SQRT_2 * (1.0 / self.kappa - self.kappa)
    }

    /// The density peaks at the location.
    pub fn mode(&self) -> f64 {
        self.theta
    }

    /// Variance `sigma^2/2 * (1/kappa^2 + kappa^2)`.
    pub fn variance(&self) -> f64 {
        let k2 = self.kappa * self.kappa;
        self.sigma * self.sigma / 2.0 * (1.0 / k2 + k2)
    }

    pub fn moments(&self) -> (f64, f64, f64) {
        (self.mean(), self.mode(), self.variance())
    }
}

/// Reparameterization `q = kappa^2 / (kappa^2 + 1)` used by quantile
/// regression.
pub fn kappa_to_q(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let k2 = kappa * kappa;
    Ok(k2 / (k2 + 1.0))
}

/// Inverse of [`kappa_to_q`]: `kappa = sqrt(q / (1 - q))`.
pub fn q_to_kappa(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q must lie in (0,1), got {q}")));
    }
    Ok((q / (1.0 - q)).sqrt())
}
