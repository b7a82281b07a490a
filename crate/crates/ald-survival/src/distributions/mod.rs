//! Closed-form math for the asymmetric Laplace and log-normal distributions,
//! plus standard-normal helpers. All operations here are pure functions.

mod ald;
mod lognormal;
pub mod normal;

pub use ald::{kappa_to_q, q_to_kappa, AldParams};
pub use lognormal::LogNormParams;
pub use normal::{erf, erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};
