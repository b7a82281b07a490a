//! CSV ingestion, feature standardization, and seeded train/test splitting.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SurvivalRecord};
use crate::error::{Error, Result};

/// Column mapping for a survival CSV. A header row is required; the time and
/// event columns must be distinct from the feature columns. An optional
/// column carries the uncensored ground-truth time for synthetic exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub feature_cols: Vec<String>,
    pub time_col: String,
    pub event_col: String,
    #[serde(default)]
    pub o_true_col: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl DatasetSchema {
    pub fn new(feature_cols: Vec<String>, time_col: &str, event_col: &str) -> Result<Self> {
        let schema = Self {
            feature_cols,
            time_col: time_col.to_string(),
            event_col: event_col.to_string(),
            o_true_col: None,
            delimiter: ',',
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_cols.is_empty() {
            return Err(Error::InvalidParameter(
                "schema needs at least one feature column".into(),
            ));
        }
        if self.feature_cols.contains(&self.time_col)
            || self.feature_cols.contains(&self.event_col)
            || self.time_col == self.event_col
        {
            return Err(Error::InvalidParameter(
                "time and event columns must be distinct from feature columns".into(),
            ));
        }
        Ok(())
    }

    /// Schema matching [`write_csv`] output for a `d`-feature dataset:
    /// features `x0..x{d-1}`, then `time`, `event`, `o_true`.
    pub fn synthetic(d: usize) -> Self {
        Self {
            feature_cols: (0..d).map(|i| format!("x{i}")).collect(),
            time_col: "time".into(),
            event_col: "event".into(),
            o_true_col: Some("o_true".into()),
            delimiter: ',',
        }
    }
}

fn parse_field(raw: &str, row: usize, col: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Csv {
        row,
        msg: format!("column '{col}': cannot parse '{raw}' as a number"),
    })
}

/// Loads a survival dataset. Rows with missing values are rejected, event
/// values must be 0 or 1, and times must be nonnegative and finite.
pub fn load_csv<P: AsRef<Path>>(path: P, schema: &DatasetSchema) -> Result<Dataset> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(|e| Error::Csv {
            row: 0,
            msg: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            row: 0,
            msg: e.to_string(),
        })?
        .clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Csv {
                row: 0,
                msg: format!("missing column '{name}' in header"),
            })
    };
    let feature_idx: Vec<usize> = schema
        .feature_cols
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_>>()?;
    let time_idx = col_index(&schema.time_col)?;
    let event_idx = col_index(&schema.event_col)?;
    let otrue_idx = schema
        .o_true_col
        .as_ref()
        .map(|c| col_index(c))
        .transpose()?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 2; // 1-based, after the header
        let row = row.map_err(|e| Error::Csv {
            row: row_no,
            msg: e.to_string(),
        })?;
        let field = |idx: usize, col: &str| -> Result<&str> {
            row.get(idx).ok_or_else(|| Error::Csv {
                row: row_no,
                msg: format!("missing column '{col}'"),
            })
        };
        let x: Vec<f64> = feature_idx
            .iter()
            .zip(&schema.feature_cols)
            .map(|(&idx, col)| {
                let v = parse_field(field(idx, col)?, row_no, col)?;
                if !v.is_finite() {
                    return Err(Error::Csv {
                        row: row_no,
                        msg: format!("column '{col}': non-finite feature value"),
                    });
                }
                Ok(v)
            })
            .collect::<Result<_>>()?;
        let y = parse_field(field(time_idx, &schema.time_col)?, row_no, &schema.time_col)?;
        if !y.is_finite() || y < 0.0 {
            return Err(Error::Csv {
                row: row_no,
                msg: format!("column '{}': time must be finite and >= 0", schema.time_col),
            });
        }
        let event_raw = parse_field(
            field(event_idx, &schema.event_col)?,
            row_no,
            &schema.event_col,
        )?;
        let event = if event_raw == 0.0 {
            false
        } else if event_raw == 1.0 {
            true
        } else {
            return Err(Error::Csv {
                row: row_no,
                msg: format!(
                    "column '{}': event must be 0 or 1, got {event_raw}",
                    schema.event_col
                ),
            });
        };
        let o_true = otrue_idx
            .map(|idx| {
                parse_field(
                    field(idx, schema.o_true_col.as_ref().unwrap())?,
                    row_no,
                    schema.o_true_col.as_ref().unwrap(),
                )
            })
            .transpose()?;
        records.push(SurvivalRecord { x, y, event, o_true });
    }
    Dataset::new(records)
}

/// Writes a dataset in the [`DatasetSchema::synthetic`] layout.
pub fn write_csv<P: AsRef<Path>>(dataset: &Dataset, path: P) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref()).map_err(|e| Error::Csv {
        row: 0,
        msg: e.to_string(),
    })?;
    let d = dataset.n_features();
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.extend(["time".into(), "event".into(), "o_true".into()]);
    writer.write_record(&header).map_err(|e| Error::Csv {
        row: 0,
        msg: e.to_string(),
    })?;
    for (i, r) in dataset.records().iter().enumerate() {
        let mut row: Vec<String> = r.x.iter().map(|v| format!("{v:.17e}")).collect();
        row.push(format!("{:.17e}", r.y));
        row.push(if r.event { "1".into() } else { "0".into() });
        row.push(match r.o_true {
            Some(o) => format!("{o:.17e}"),
            None => f64::NAN.to_string(),
        });
        writer.write_record(&row).map_err(|e| Error::Csv {
            row: i + 2,
            msg: e.to_string(),
        })?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-feature z-scoring parameters fit on training data only. Zero-variance
/// features pass through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub constant_features: Vec<usize>,
}

impl FeatureScaler {
    pub fn fit(train: &Dataset) -> Self {
        let d = train.n_features();
        let n = train.len() as f64;
        let mut means = vec![0.0; d];
        for r in train.records() {
            for (m, v) in means.iter_mut().zip(&r.x) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for r in train.records() {
            for ((v, m), acc) in r.x.iter().zip(&means).zip(vars.iter_mut()) {
                *acc += (v - m) * (v - m);
            }
        }
        let mut constant_features = Vec::new();
        let sds: Vec<f64> = vars
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let sd = (v / n).sqrt();
                if sd <= f64::EPSILON {
                    constant_features.push(j);
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Self {
            means,
            sds,
            constant_features,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, v)| {
                if self.constant_features.contains(&j) {
                    *v
                } else {
                    (v - self.means[j]) / self.sds[j]
                }
            })
            .collect())
    }

    /// Identity scaler used when standardization is disabled.
    pub fn identity(d: usize) -> Self {
        Self {
            means: vec![0.0; d],
            sds: vec![1.0; d],
            constant_features: (0..d).collect(),
        }
    }

    fn transform_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        let records = ds
            .records()
            .iter()
            .map(|r| {
                Ok(SurvivalRecord {
                    x: self.apply(&r.x)?,
                    ..r.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(records)
    }
}

/// Z-scores both splits with parameters fit on the training split only.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, FeatureScaler)> {
    let scaler = FeatureScaler::fit(train);
    Ok((
        scaler.transform_dataset(train)?,
        scaler.transform_dataset(test)?,
        scaler,
    ))
}

/// Seeded shuffle-then-partition split; the first `test_fraction` of the
/// shuffled order becomes the test set.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must lie in (0,1), got {test_fraction}"
        )));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Data(
            "need at least two records to split".to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let test_n = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let records = dataset.records();
    let test: Vec<SurvivalRecord> = order[..test_n].iter().map(|&i| records[i].clone()).collect();
    let train: Vec<SurvivalRecord> = order[test_n..].iter().map(|&i| records[i].clone()).collect();
    Ok((Dataset::new(train)?, Dataset::new(test)?))
}
