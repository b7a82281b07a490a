//! Parametric survival analysis with the asymmetric Laplace distribution.
//!
//! The crate provides:
//! - closed-form ALD and log-normal distribution math ([`distributions`]);
//! - censoring-aware losses with analytic gradients ([`losses`]);
//! - a small fully-connected network with reverse-mode gradients, Adam, and
//!   early stopping ([`neuralnet`]);
//! - the ALD, censored-quantile-regression, and log-normal survival models as
//!   fit/predict pairs ([`models`]);
//! - seeded synthetic survival data generators ([`datagen`]);
//! - CSV ingestion, standardization, and splitting ([`dataio`]);
//! - the nine-metric evaluation suite ([`metrics`]).

pub mod data;
pub mod datagen;
pub mod dataio;
pub mod distributions;
pub mod error;
pub mod losses;
pub mod metrics;
pub mod models;
pub mod neuralnet;

pub use data::{Dataset, SurvivalRecord};
pub use error::{Error, Result};
