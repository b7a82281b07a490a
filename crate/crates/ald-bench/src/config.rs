//! Experiment configuration: dataset spec, method list, seeds, and per-method
//! training overrides, read from a TOML file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ald_survival::dataio::DatasetSchema;
use ald_survival::models::{FitOptions, ModelKind, NetworkOptions, DEFAULT_QUANTILE_GRID};
use ald_survival::neuralnet::TrainConfig;
use ald_survival::{Error, Result};

/// Where the data comes from: a named synthetic generator with explicit
/// train/test sizes, or a CSV file split by fraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Synthetic {
        name: String,
        n_train: usize,
        n_test: usize,
    },
    Csv {
        path: String,
        test_fraction: f64,
        schema: DatasetSchema,
    },
}

impl DatasetSpec {
    pub fn label(&self) -> String {
        match self {
            DatasetSpec::Synthetic { name, .. } => name.clone(),
            DatasetSpec::Csv { path, .. } => Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.clone()),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, DatasetSpec::Synthetic { .. })
    }
}

/// Optional per-method overrides layered on top of the built-in defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSettings {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub validation_fraction: Option<f64>,
    pub early_stop_patience: Option<usize>,
    pub hidden_dims: Option<Vec<usize>>,
    pub dropout_rate: Option<f64>,
    pub residual: Option<bool>,
    pub quantile_grid: Option<Vec<f64>>,
    pub standardize_features: Option<bool>,
    pub scale_time: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub methods: Vec<String>,
    #[serde(default = "default_seed_count")]
    pub seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    /// Per-method overrides keyed by method name.
    #[serde(default)]
    pub overrides: BTreeMap<String, MethodSettings>,
    /// "welch" (default) or "student" for the comparison t-test.
    #[serde(default = "default_ttest")]
    pub ttest: String,
}

fn default_seed_count() -> u64 {
    10
}

fn default_ttest() -> String {
    "welch".into()
}

impl ExperimentConfig {
    pub fn from_toml_str(raw: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(raw).map_err(|e| Error::Serialization(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        Self::from_toml_str(&raw)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("method list is empty".into()));
        }
        for m in &self.methods {
            ModelKind::parse(m)?;
        }
        if self.seeds == 0 {
            return Err(Error::InvalidParameter("seed count must be >= 1".into()));
        }
        match &self.dataset {
            DatasetSpec::Synthetic { name, n_train, n_test } => {
                ald_survival::datagen::SyntheticConfig::parse(name)?;
                if *n_train == 0 || *n_test == 0 {
                    return Err(Error::InvalidParameter(
                        "n_train and n_test must be positive".into(),
                    ));
                }
            }
            DatasetSpec::Csv { test_fraction, schema, .. } => {
                if !(*test_fraction > 0.0 && *test_fraction < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "test_fraction must lie in (0,1), got {test_fraction}"
                    )));
                }
                schema.validate()?;
            }
        }
        if self.ttest != "welch" && self.ttest != "student" {
            return Err(Error::InvalidParameter(format!(
                "ttest must be 'welch' or 'student', got '{}'",
                self.ttest
            )));
        }
        Ok(())
    }

    pub fn model_kinds(&self) -> Vec<ModelKind> {
        self.methods
            .iter()
            .map(|m| ModelKind::parse(m).expect("validated"))
            .collect()
    }

    /// Training settings for one method on this config's dataset: defaults,
    /// then built-in per-dataset adjustments, then user overrides.
    pub fn resolve(&self, method: ModelKind) -> ResolvedSettings {
        let mut train = TrainConfig::default();
        let mut net = NetworkOptions::default();
        let mut fit = FitOptions::default();
        let mut grid = DEFAULT_QUANTILE_GRID.to_vec();

        if let DatasetSpec::Synthetic { name, .. } = &self.dataset {
            if let Some(epochs) = builtin_synthetic_epochs(method, name) {
                train.epochs = epochs;
                net.dropout_rate = 0.0;
            }
        }

        if let Some(over) = self.overrides.get(method.name()) {
            if let Some(v) = over.epochs {
                train.epochs = v;
            }
            if let Some(v) = over.batch_size {
                train.batch_size = v;
            }
            if let Some(v) = over.learning_rate {
                train.learning_rate = v;
            }
            if let Some(v) = over.validation_fraction {
                train.validation_fraction = v;
            }
            if let Some(v) = over.early_stop_patience {
                train.early_stop_patience = v;
            }
            if let Some(v) = &over.hidden_dims {
                net.hidden_dims = v.clone();
            }
            if let Some(v) = over.dropout_rate {
                net.dropout_rate = v;
            }
            if let Some(v) = over.residual {
                net.residual = v;
            }
            if let Some(v) = &over.quantile_grid {
                grid = v.clone();
            }
            if let Some(v) = over.standardize_features {
                fit.standardize_features = v;
            }
            if let Some(v) = over.scale_time {
                fit.scale_time = v;
            }
        }

        ResolvedSettings {
            train,
            net,
            fit,
            grid,
        }
    }
}

/// Fully resolved per-run settings (the run seed is filled in later).
#[derive(Debug, Clone)]
pub struct ResolvedSettings {
    pub train: TrainConfig,
    pub net: NetworkOptions,
    pub fit: FitOptions,
    pub grid: Vec<f64>,
}

/// Tuned epoch counts for the baseline methods on the synthetic families;
/// the ALD model keeps the 200-epoch default everywhere.
fn builtin_synthetic_epochs(method: ModelKind, dataset: &str) -> Option<usize> {
    if method == ModelKind::Ald {
        return None;
    }
    match dataset {
        "norm_linear" | "norm_nonlinear" | "exponential" | "weibull" | "lognorm"
        | "norm_uniform" => Some(100),
        "norm_heavy" | "norm_med" | "norm_light" | "norm_same" => Some(20),
        "lognorm_heavy" | "lognorm_med" | "lognorm_light" | "lognorm_same" => Some(10),
        _ => None,
    }
}
