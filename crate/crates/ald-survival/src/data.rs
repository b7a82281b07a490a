//! Survival records and datasets shared by the generators, loaders, and models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One right-censored observation: covariates, observed time `y = min(o, c)`,
/// and the event indicator (`true` when the event was observed, i.e. `o <= c`).
///
/// Synthetic records also retain the uncensored ground-truth event time in
/// `o_true`; real records leave it unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub x: Vec<f64>,
    pub y: f64,
    pub event: bool,
    pub o_true: Option<f64>,
}

/// An owned collection of records with a consistent feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<SurvivalRecord>,
    n_features: usize,
}

impl Dataset {
    pub fn new(records: Vec<SurvivalRecord>) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(Error::Empty("dataset has no records".into()));
        };
        let n_features = first.x.len();
        for (i, r) in records.iter().enumerate() {
            if r.x.len() != n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    got: r.x.len(),
                });
            }
            if !r.y.is_finite() || r.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite value in record {i}")));
            }
        }
        Ok(Self {
            records,
            n_features,
        })
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.y).collect()
    }

    pub fn events(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.event).collect()
    }

    /// Fraction of records with `event == false`.
    pub fn censoring_proportion(&self) -> f64 {
        let censored = self.records.iter().filter(|r| !r.event).count();
        censored as f64 / self.records.len() as f64
    }

    pub fn into_records(self) -> Vec<SurvivalRecord> {
        self.records
    }
}
