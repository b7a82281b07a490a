//! Minibatch Adam training with a seeded validation split and early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, backward, forward_eval, forward_train, AdamState, MlpConfig, MlpParams};
use crate::data::SurvivalRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
    pub early_stop_patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 128,
            learning_rate: 0.01,
            validation_fraction: 0.2,
            early_stop_patience: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.early_stop_patience == 0 {
            return Err(Error::InvalidParameter(
                "epochs, batch_size, and early_stop_patience must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "validation_fraction must lie in (0,1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// A per-record training objective over the network's head outputs.
pub trait Objective {
    /// Loss value and its gradient with respect to each head output.
    fn loss(&self, outputs: &[f64], record: &SurvivalRecord, idx: usize) -> (f64, Vec<f64>);

    /// Hook run before each epoch with an inference-mode predictor; used to
    /// refresh auxiliary per-record state such as censoring-quantile weights.
    fn epoch_start(
        &mut self,
        _records: &[SurvivalRecord],
        _predict: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    ) {
    }

    /// Diagnostics accumulated during training, reported in the log.
    fn diagnostics(&self) -> Vec<(String, f64)> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub epochs_run: usize,
    pub diagnostics: Vec<(String, f64)>,
}

/// Runs minibatch Adam, tracking validation loss each epoch, and returns the
/// parameters from the best validation epoch. Stops early after
/// `early_stop_patience` epochs without improvement. A non-finite loss or
/// parameter aborts with a diagnostic instead of training through NaNs.
pub fn train<O: Objective>(
    records: &[SurvivalRecord],
    mlp: &MlpConfig,
    cfg: &TrainConfig,
    objective: &mut O,
) -> Result<(MlpParams, TrainLog)> {
    mlp.validate()?;
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::Empty("training set has no records".into()));
    }
    for r in records {
        if r.x.len() != mlp.input_dim {
            return Err(Error::DimensionMismatch {
                expected: mlp.input_dim,
                got: r.x.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = MlpParams::init(mlp, &mut rng);
    let mut adam = AdamState::new(params.values.len());

    let n = records.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let val_n = if n == 1 {
        0
    } else {
        ((cfg.validation_fraction * n as f64).round() as usize).clamp(1, n - 1)
    };
    let (val_idx, train_idx) = order.split_at(val_n);
    let val_idx = val_idx.to_vec();
    let mut train_idx = train_idx.to_vec();

    let mut log = TrainLog {
        best_val_loss: f64::INFINITY,
        ..TrainLog::default()
    };
    let mut best_params = params.clone();
    let mut patience_left = cfg.early_stop_patience;
    let mut grad = vec![0.0; params.values.len()];

    for epoch in 0..cfg.epochs {
        {
            let params_ref = &params;
            let mut predict = |x: &[f64]| forward_eval(mlp, params_ref, x).expect("dims checked");
            objective.epoch_start(records, &mut predict);
        }

        train_idx.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in train_idx.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let inv = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &idx in batch {
                let rec = &records[idx];
                let (out, cache) = forward_train(mlp, &params, &rec.x, &mut rng)?;
                let (value, dout) = objective.loss(&out, rec, idx);
                batch_loss += value;
                backward(mlp, &params, &cache, &dout, &mut grad, inv)?;
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "loss became non-finite at epoch {epoch}"
                )));
            }
            epoch_loss += batch_loss;
            adam_step(&mut params.values, &grad, &mut adam, cfg.learning_rate)?;
            if !params.all_finite() {
                return Err(Error::NonFinite(format!(
                    "parameters became non-finite at epoch {epoch}"
                )));
            }
        }
        let train_loss = epoch_loss / train_idx.len() as f64;

        let val_loss = if val_idx.is_empty() {
            train_loss
        } else {
            let mut acc = 0.0;
            for &idx in &val_idx {
                let rec = &records[idx];
                let out = forward_eval(mlp, &params, &rec.x)?;
                acc += objective.loss(&out, rec, idx).0;
            }
            acc / val_idx.len() as f64
        };
        if !val_loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "validation loss became non-finite at epoch {epoch}"
            )));
        }

        log.train_loss.push(train_loss);
        log.val_loss.push(val_loss);
        log.epochs_run = epoch + 1;

        if val_loss < log.best_val_loss {
            log.best_val_loss = val_loss;
            log.best_epoch = epoch;
            best_params = params.clone();
            patience_left = cfg.early_stop_patience;
        } else {
            patience_left -= 1;
            if patience_left == 0 {
                break;
            }
        }
    }

    log.diagnostics = objective.diagnostics();
    Ok((best_params, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::AldParams;
    use crate::losses::{ald_nll_censored, ald_nll_observed};
    use crate::neuralnet::Activation;

    struct AldObjective;

    impl Objective for AldObjective {
        fn loss(&self, outputs: &[f64], record: &SurvivalRecord, _idx: usize) -> (f64, Vec<f64>) {
            let p = AldParams::new(outputs[0], outputs[1].max(1e-12), outputs[2].max(1e-12))
                .expect("positive heads");
            let term = if record.event {
                ald_nll_observed(record.y, &p)
            } else {
                ald_nll_censored(record.y, &p)
            };
            (term.value, term.grad.to_vec())
        }
    }

    fn constant_records(n: usize, y: f64) -> Vec<SurvivalRecord> {
        (0..n)
            .map(|i| SurvivalRecord {
                x: vec![(i % 7) as f64 / 7.0],
                y,
                event: true,
                o_true: Some(y),
            })
            .collect()
    }

    fn fit_config() -> (MlpConfig, TrainConfig) {
        let mlp = MlpConfig {
            input_dim: 1,
            hidden_dims: vec![16, 16],
            head_activations: vec![Activation::Exp, Activation::Exp, Activation::Exp],
            dropout_rate: 0.0,
            residual: true,
        };
        let cfg = TrainConfig {
            epochs: 150,
            batch_size: 32,
            learning_rate: 0.01,
            validation_fraction: 0.2,
            early_stop_patience: 30,
            seed: 7,
        };
        (mlp, cfg)
    }

    #[test]
    fn fits_constant_target() {
        let records = constant_records(256, 2.0);
        let (mlp, cfg) = fit_config();
        let (params, log) = train(&records, &mlp, &cfg, &mut AldObjective).unwrap();
        let out = forward_eval(&mlp, &params, &[0.5]).unwrap();
        assert!(
            (out[0] - 2.0).abs() < 0.1,
            "theta head {} should approach the constant target",
            out[0]
        );
        assert!(out[1] < 0.5, "sigma head {} should shrink", out[1]);
        assert!(log.val_loss[log.best_epoch] <= log.val_loss[0]);
    }

    #[test]
    fn all_censored_batch_trains() {
        let mut records = constant_records(64, 3.0);
        for r in &mut records {
            r.event = false;
        }
        let (mlp, mut cfg) = fit_config();
        cfg.epochs = 20;
        let result = train(&records, &mlp, &cfg, &mut AldObjective);
        assert!(result.is_ok());
    }

    #[test]
    fn same_seed_same_log() {
        let records = constant_records(128, 1.5);
        let (mlp, mut cfg) = fit_config();
        cfg.epochs = 12;
        let (p1, log1) = train(&records, &mlp, &cfg, &mut AldObjective).unwrap();
        let (p2, log2) = train(&records, &mlp, &cfg, &mut AldObjective).unwrap();
        assert_eq!(p1.values, p2.values);
        assert_eq!(log1.train_loss, log2.train_loss);
        assert_eq!(log1.val_loss, log2.val_loss);
    }

    #[test]
    fn empty_dataset_is_error() {
        let (mlp, cfg) = fit_config();
        assert!(train(&[], &mlp, &cfg, &mut AldObjective).is_err());
    }

    #[test]
    fn early_stopping_caps_epochs() {
        let records = constant_records(64, 1.0);
        let (mlp, mut cfg) = fit_config();
        cfg.epochs = 500;
        cfg.early_stop_patience = 5;
        let (_, log) = train(&records, &mlp, &cfg, &mut AldObjective).unwrap();
        assert!(log.epochs_run < 500, "ran {} epochs", log.epochs_run);
        assert_eq!(log.epochs_run, log.best_epoch + 1 + 5);
    }
}
