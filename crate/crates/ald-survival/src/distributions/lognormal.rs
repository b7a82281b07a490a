//! Log-normal distribution with log-scale mean `mu` and log-scale SD `eta`.

use serde::{Deserialize, Serialize};

use crate::distributions::normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
use crate::error::{Error, Result};

/// `ln(Y) ~ Normal(mu, eta^2)` with `eta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormParams {
    mu: f64,
    eta: f64,
}

impl LogNormParams {
    pub fn new(mu: f64, eta: f64) -> Result<Self> {
        if !mu.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "log-normal parameters must be finite, got ({mu}, {eta})"
            )));
        }
        if eta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "log-normal requires eta > 0, got {eta}"
            )));
        }
        Ok(Self { mu, eta })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Density; 0 for `y <= 0` by convention.
    pub fn pdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let z = (y.ln() - self.mu) / self.eta;
        std_normal_pdf(z) / (y * self.eta)
    }

    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Err(Error::Domain(format!(
                "log-normal log-density requires y > 0, got {y}"
            )));
        }
        let z = (y.ln() - self.mu) / self.eta;
        Ok(-y.ln() - self.eta.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z)
    }

    /// CDF; 0 for `y <= 0` by convention.
    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        std_normal_cdf((y.ln() - self.mu) / self.eta)
    }

    pub fn survival(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        // erfc route keeps the upper tail accurate.
        std_normal_cdf(-(y.ln() - self.mu) / self.eta)
    }

    /// Quantile `exp(mu + eta * Phi^-1(q))` for `q` in (0, 1).
    pub fn quantile(&self, q: f64) -> Result<f64> {
        Ok((self.mu + self.eta * std_normal_quantile(q)?).exp())
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.eta * self.eta).exp()
    }

    pub fn median(&self) -> f64 {
        self.mu.exp()
    }

    pub fn mode(&self) -> f64 {
        (self.mu - self.eta * self.eta).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn median_at_exp_mu() {
        let d = LogNormParams::new(0.0, 1.0).unwrap();
        assert_relative_eq!(d.cdf(1.0), 0.5, max_relative = 1e-12);
        let d = LogNormParams::new(2.0, 3.0).unwrap();
        assert_relative_eq!(d.quantile(0.5).unwrap(), 2f64.exp(), max_relative = 1e-10);
    }

    #[test]
    fn nonpositive_support_convention() {
        let d = LogNormParams::new(0.3, 0.8).unwrap();
        assert_eq!(d.pdf(0.0), 0.0);
        assert_eq!(d.pdf(-2.0), 0.0);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.survival(0.0), 1.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = LogNormParams::new(1.2, 0.6).unwrap();
        for i in 1..100 {
            let q = i as f64 / 100.0;
            let y = d.quantile(q).unwrap();
            assert!((d.cdf(y) - q).abs() < 1e-8, "q={q}, got {}", d.cdf(y));
        }
    }

    #[test]
    fn closed_form_summaries() {
        let d = LogNormParams::new(1.0, 0.5).unwrap();
        assert_relative_eq!(d.mean(), (1.0 + 0.125f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(d.median(), 1f64.exp(), max_relative = 1e-14);
        assert_relative_eq!(d.mode(), (0.75f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_eta() {
        assert!(LogNormParams::new(0.0, 0.0).is_err());
        assert!(LogNormParams::new(0.0, -1.0).is_err());
    }
}
