//! The three trainable survival models (ALD, CQRNN, log-normal) as
//! fit/predict pairs, with uniform adapters feeding the metrics suite.
//!
//! Observed times are divided by the training-set mean before training and
//! the scaling is inverted on prediction outputs; MAE is reported in scaled
//! units. Features are z-scored with training-set statistics.

mod adapter;

pub use adapter::PredictedDistribution;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SurvivalRecord};
use crate::dataio::FeatureScaler;
use crate::distributions::{AldParams, LogNormParams};
use crate::error::{Error, Result};
use crate::losses::{
    ald_nll_censored, ald_nll_observed, cqr_censored_grad, cqr_censored_loss, lognorm_nll,
    pinball_grad, pinball_loss,
};
use crate::metrics::{
    self, calibration_curve, cens_dcal, censoring_kaplan_meier, harrells_c, ibs, kaplan_meier,
    ols_fit, percentile, unos_c, CalibrationVersion, CdfAdapter, MetricReport,
};
use crate::neuralnet::{
    forward_eval, train as train_network, Activation, MlpConfig, MlpParams, Objective,
    TrainConfig, TrainLog,
};

/// Default CQRNN quantile grid 0.1..0.9.
pub const DEFAULT_QUANTILE_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

const LOGNORM_TIME_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ald,
    Cqrnn,
    Lognorm,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Ald => "ald",
            ModelKind::Cqrnn => "cqrnn",
            ModelKind::Lognorm => "lognorm",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_lowercase().as_str() {
            "ald" => Ok(ModelKind::Ald),
            "cqrnn" => Ok(ModelKind::Cqrnn),
            "lognorm" | "lognormal" => Ok(ModelKind::Lognorm),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Encoder shape knobs shared by all three models; head activations are fixed
/// per model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkOptions {
    pub hidden_dims: Vec<usize>,
    pub dropout_rate: f64,
    pub residual: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            hidden_dims: vec![32, 32],
            dropout_rate: 0.1,
            residual: true,
        }
    }
}

/// Preprocessing toggles: feature z-scoring and mean time scaling are both on
/// by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub standardize_features: bool,
    pub scale_time: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            standardize_features: true,
            scale_time: true,
        }
    }
}

/// A fitted model: network weights plus the preprocessing captured from the
/// training split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalModel {
    kind: ModelKind,
    mlp_config: MlpConfig,
    params: MlpParams,
    scaler: FeatureScaler,
    time_scale: f64,
    quantile_grid: Option<Vec<f64>>,
    y_star: Option<f64>,
    pub train_log: TrainLog,
}

struct AldObjective;

impl AldObjective {
    fn params_from(outputs: &[f64]) -> AldParams {
        let theta = outputs[0].clamp(0.0, 1e12);
        let sigma = outputs[1].clamp(1e-12, 1e12);
        let kappa = outputs[2].clamp(1e-9, 1e9);
        AldParams::new(theta, sigma, kappa).expect("clamped parameters are valid")
    }
}

impl Objective for AldObjective {
    fn loss(&self, outputs: &[f64], record: &SurvivalRecord, _idx: usize) -> (f64, Vec<f64>) {
        let p = Self::params_from(outputs);
        let term = if record.event {
            ald_nll_observed(record.y, &p)
        } else {
            ald_nll_censored(record.y, &p)
        };
        (term.value, term.grad.to_vec())
    }
}

struct LognormObjective;

impl Objective for LognormObjective {
    fn loss(&self, outputs: &[f64], record: &SurvivalRecord, _idx: usize) -> (f64, Vec<f64>) {
        let p = LogNormParams::new(outputs[0].clamp(-1e12, 1e12), outputs[1].clamp(1e-12, 1e12))
            .expect("clamped parameters are valid");
        let term = lognorm_nll(record.y, record.event, &p).expect("positive times enforced by fit");
        (term.value, term.grad.to_vec())
    }
}

struct CqrnnObjective {
    grid: Vec<f64>,
    y_star: f64,
    /// Per-record per-head Portnoy weights; `None` for observed records.
    weights: Vec<Option<Vec<f64>>>,
    clamped_weights: usize,
    beyond_pseudo: usize,
}

impl CqrnnObjective {
    fn new(grid: Vec<f64>, y_star: f64, n: usize) -> Self {
        Self {
            grid,
            y_star,
            weights: vec![None; n],
            clamped_weights: 0,
            beyond_pseudo: 0,
        }
    }
}

impl Objective for CqrnnObjective {
    fn loss(&self, outputs: &[f64], record: &SurvivalRecord, idx: usize) -> (f64, Vec<f64>) {
        let mut total = 0.0;
        let mut grads = vec![0.0; outputs.len()];
        if record.event {
            for (k, (&q, &theta)) in self.grid.iter().zip(outputs).enumerate() {
                total += pinball_loss(record.y, theta, q).expect("grid lies in (0,1)");
                grads[k] = pinball_grad(record.y, theta, q);
            }
        } else {
            let weights = self.weights[idx]
                .as_ref()
                .expect("censored weights refreshed at epoch start");
            for (k, (&q, &theta)) in self.grid.iter().zip(outputs).enumerate() {
                let w = weights[k];
                total += cqr_censored_loss(record.y, self.y_star, theta, q, w)
                    .expect("grid lies in (0,1)");
                grads[k] = cqr_censored_grad(record.y, self.y_star, theta, q, w);
            }
        }
        (total, grads)
    }

    fn epoch_start(
        &mut self,
        records: &[SurvivalRecord],
        predict: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    ) {
        for (idx, rec) in records.iter().enumerate() {
            if rec.event {
                continue;
            }
            // Approximate the censoring quantile by the grid value whose
            // current predicted quantile is closest to the censoring time.
            let theta = predict(&rec.x);
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for (k, &t) in theta.iter().enumerate() {
                let d = (t - rec.y).abs();
                if d < best_dist {
                    best_dist = d;
                    best = k;
                }
            }
            let q_c = self.grid[best];
            if rec.y > self.y_star {
                self.beyond_pseudo += 1;
            }
            let ws: Vec<f64> = self
                .grid
                .iter()
                .map(|&q| {
                    if rec.y > self.y_star {
                        1.0
                    } else {
                        let raw = (q - q_c) / (1.0 - q_c);
                        if !(0.0..=1.0).contains(&raw) {
                            self.clamped_weights += 1;
                        }
                        raw.clamp(0.0, 1.0)
                    }
                })
                .collect();
            self.weights[idx] = Some(ws);
        }
    }

    fn diagnostics(&self) -> Vec<(String, f64)> {
        vec![
            ("portnoy_weight_clamps".into(), self.clamped_weights as f64),
            ("censored_beyond_pseudo".into(), self.beyond_pseudo as f64),
        ]
    }
}

fn check_times(train: &Dataset) -> Result<()> {
    if train.records().iter().any(|r| r.y < 0.0) {
        return Err(Error::Data("training times must be nonnegative".into()));
    }
    Ok(())
}

fn time_scale_of(train: &Dataset, options: &FitOptions) -> Result<f64> {
    if !options.scale_time {
        return Ok(1.0);
    }
    let mean = train.records().iter().map(|r| r.y).sum::<f64>() / train.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Data(format!(
            "cannot scale by the mean training time {mean}"
        )));
    }
    Ok(mean)
}

fn preprocess(
    train: &Dataset,
    options: &FitOptions,
    time_floor: Option<f64>,
) -> Result<(Vec<SurvivalRecord>, FeatureScaler, f64)> {
    check_times(train)?;
    let scale = time_scale_of(train, options)?;
    let scaler = if options.standardize_features {
        FeatureScaler::fit(train)
    } else {
        FeatureScaler::identity(train.n_features())
    };
    let records = train
        .records()
        .iter()
        .map(|r| {
            let y = match time_floor {
                Some(floor) => r.y.max(floor),
                None => r.y,
            };
            Ok(SurvivalRecord {
                x: scaler.apply(&r.x)?,
                y: y / scale,
                event: r.event,
                o_true: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((records, scaler, scale))
}

fn mlp_config_for(kind: ModelKind, input_dim: usize, net: &NetworkOptions, heads: usize) -> MlpConfig {
    let head_activations = match kind {
        ModelKind::Ald => vec![Activation::Exp; 3],
        ModelKind::Lognorm => vec![Activation::Identity, Activation::Softplus],
        ModelKind::Cqrnn => vec![Activation::Identity; heads],
    };
    MlpConfig {
        input_dim,
        hidden_dims: net.hidden_dims.clone(),
        head_activations,
        dropout_rate: net.dropout_rate,
        residual: net.residual,
    }
}

/// Fits the ALD model by censoring-aware maximum likelihood.
pub fn fit_ald(
    train: &Dataset,
    net: &NetworkOptions,
    train_cfg: &TrainConfig,
    options: &FitOptions,
) -> Result<SurvivalModel> {
    let (records, scaler, time_scale) = preprocess(train, options, None)?;
    let mlp = mlp_config_for(ModelKind::Ald, train.n_features(), net, 3);
    let (params, train_log) = train_network(&records, &mlp, train_cfg, &mut AldObjective)?;
    Ok(SurvivalModel {
        kind: ModelKind::Ald,
        mlp_config: mlp,
        params,
        scaler,
        time_scale,
        quantile_grid: None,
        y_star: None,
        train_log,
    })
}

/// Fits the log-normal MLE baseline; times at zero are floored at a small
/// epsilon for this model only.
pub fn fit_lognorm(
    train: &Dataset,
    net: &NetworkOptions,
    train_cfg: &TrainConfig,
    options: &FitOptions,
) -> Result<SurvivalModel> {
    let (records, scaler, time_scale) = preprocess(train, options, Some(LOGNORM_TIME_FLOOR))?;
    let mlp = mlp_config_for(ModelKind::Lognorm, train.n_features(), net, 2);
    let (params, train_log) = train_network(&records, &mlp, train_cfg, &mut LognormObjective)?;
    Ok(SurvivalModel {
        kind: ModelKind::Lognorm,
        mlp_config: mlp,
        params,
        scaler,
        time_scale,
        quantile_grid: None,
        y_star: None,
        train_log,
    })
}

/// Fits the censored quantile regression baseline over `grid` (strictly
/// increasing values in (0,1)). Observed records use the pinball loss;
/// censored records are re-weighted between the censoring time and the
/// pseudo value `y* = 1.2 * max training y`, with the censoring quantile
/// re-approximated from current predictions at the start of every epoch.
pub fn fit_cqrnn(
    train: &Dataset,
    grid: &[f64],
    net: &NetworkOptions,
    train_cfg: &TrainConfig,
    options: &FitOptions,
) -> Result<SurvivalModel> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("quantile grid is empty".into()));
    }
    if grid.iter().any(|&q| !(q > 0.0 && q < 1.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "quantile grid must be strictly increasing within (0,1)".into(),
        ));
    }
    let (records, scaler, time_scale) = preprocess(train, options, None)?;
    let max_y = records.iter().map(|r| r.y).fold(f64::NEG_INFINITY, f64::max);
    let y_star_scaled = 1.2 * max_y;
    let mlp = mlp_config_for(ModelKind::Cqrnn, train.n_features(), net, grid.len());
    let mut objective = CqrnnObjective::new(grid.to_vec(), y_star_scaled, records.len());
    let (params, train_log) = train_network(&records, &mlp, train_cfg, &mut objective)?;
    Ok(SurvivalModel {
        kind: ModelKind::Cqrnn,
        mlp_config: mlp,
        params,
        scaler,
        time_scale,
        quantile_grid: Some(grid.to_vec()),
        y_star: Some(y_star_scaled * time_scale),
        train_log,
    })
}

impl SurvivalModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn y_star(&self) -> Option<f64> {
        self.y_star
    }

    /// Per-record distribution in original time units.
    pub fn predict(&self, x: &[f64]) -> Result<PredictedDistribution> {
        let scaled = self.scaler.apply(x)?;
        let out = forward_eval(&self.mlp_config, &self.params, &scaled)?;
        let s = self.time_scale;
        match self.kind {
            ModelKind::Ald => {
                let theta = out[0].clamp(0.0, 1e12) * s;
                let sigma = out[1].clamp(1e-12, 1e12) * s;
                let kappa = out[2].clamp(1e-9, 1e9);
                Ok(PredictedDistribution::Ald(AldParams::new(
                    theta, sigma, kappa,
                )?))
            }
            ModelKind::Lognorm => {
                let mu = out[0].clamp(-1e12, 1e12) + s.ln();
                let eta = out[1].clamp(1e-12, 1e12);
                Ok(PredictedDistribution::LogNorm(LogNormParams::new(mu, eta)?))
            }
            ModelKind::Cqrnn => {
                // Monotone rearrangement: sort the raw quantile heads.
                let mut values: Vec<f64> = out.iter().map(|v| v * s).collect();
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Ok(PredictedDistribution::Quantiles {
                    grid: self.quantile_grid.clone().unwrap(),
                    values,
                    y_star: self.y_star.unwrap(),
                })
            }
        }
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<PredictedDistribution>> {
        data.records().iter().map(|r| self.predict(&r.x)).collect()
    }

    /// The summary statistic used for point predictions: the closed-form mean
    /// for the parametric models, the median for the quantile model.
    pub fn default_point_estimate(&self) -> PointEstimate {
        match self.kind {
            ModelKind::Cqrnn => PointEstimate::Median,
            _ => PointEstimate::Mean,
        }
    }

    /// Risk scores for concordance: higher risk must accompany shorter
    /// survival, so the negated point estimate is used.
    pub fn risk_scores(&self, data: &Dataset) -> Result<Vec<f64>> {
        let kind = self.default_point_estimate();
        self.predict_dataset(data)?
            .iter()
            .map(|d| point_estimate(d, kind).map(|t| -t))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointEstimate {
    Mean,
    Median,
    Mode,
}

impl PointEstimate {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_lowercase().as_str() {
            "mean" => Ok(PointEstimate::Mean),
            "median" => Ok(PointEstimate::Median),
            "mode" => Ok(PointEstimate::Mode),
            other => Err(Error::InvalidParameter(format!(
                "unknown point estimate '{other}'"
            ))),
        }
    }
}

/// Closed-form point summary of a predicted distribution. The quantile
/// payload supports only the median (at a grid value of 0.5).
pub fn point_estimate(dist: &PredictedDistribution, kind: PointEstimate) -> Result<f64> {
    match (dist, kind) {
        (PredictedDistribution::Ald(p), PointEstimate::Mean) => Ok(p.mean()),
        (PredictedDistribution::Ald(p), PointEstimate::Median) => p.quantile(0.5),
        (PredictedDistribution::Ald(p), PointEstimate::Mode) => Ok(p.mode()),
        (PredictedDistribution::LogNorm(p), PointEstimate::Mean) => Ok(p.mean()),
        (PredictedDistribution::LogNorm(p), PointEstimate::Median) => Ok(p.median()),
        (PredictedDistribution::LogNorm(p), PointEstimate::Mode) => Ok(p.mode()),
        (PredictedDistribution::Quantiles { grid, values, .. }, PointEstimate::Median) => grid
            .iter()
            .position(|&q| (q - 0.5).abs() < 1e-9)
            .map(|i| values[i])
            .ok_or_else(|| {
                Error::Unsupported("quantile grid does not include the median".into())
            }),
        (PredictedDistribution::Quantiles { .. }, _) => Err(Error::Unsupported(
            "quantile predictions support only the median point estimate".into(),
        )),
    }
}

/// 50th/75th/95th percentiles of the predicted probability of an event at or
/// before time zero over a test set; only meaningful for the ALD model,
/// whose support extends below zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeSupportSummary {
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

pub fn negative_support_diagnostic(
    model: &SurvivalModel,
    test: &Dataset,
) -> Result<NegativeSupportSummary> {
    if model.kind != ModelKind::Ald {
        return Err(Error::Unsupported(
            "negative-support diagnostic applies to the ALD model only".into(),
        ));
    }
    let f0: Vec<f64> = model
        .predict_dataset(test)?
        .iter()
        .map(|d| d.cdf(0.0))
        .collect();
    Ok(NegativeSupportSummary {
        p50: percentile(&f0, 0.50)?,
        p75: percentile(&f0, 0.75)?,
        p95: percentile(&f0, 0.95)?,
    })
}

/// Evaluates the full nine-metric bundle for a fitted model on a test split.
/// The training split supplies the weight curves and the IBS time grid;
/// nothing else from it is used. MAE is computed in mean-scaled time units.
///
/// Weighting conventions: Uno's C uses the Kaplan-Meier estimate of the
/// training censoring distribution; the integrated Brier score weights both
/// terms by the Kaplan-Meier estimate of the training event-time survival
/// curve, which is the convention the published benchmark figures follow.
pub fn evaluate(
    model: &SurvivalModel,
    train: &Dataset,
    test: &Dataset,
    synthetic: bool,
) -> Result<MetricReport> {
    let dists = model.predict_dataset(test)?;
    let point_kind = model.default_point_estimate();
    let preds: Vec<f64> = dists
        .iter()
        .map(|d| point_estimate(d, point_kind))
        .collect::<Result<_>>()?;
    let risks: Vec<f64> = preds.iter().map(|p| -p).collect();

    let mae_scaled = metrics::mae(&preds, test.records(), synthetic)? / model.time_scale();

    let times = test.times();
    let events = test.events();
    let harrell = harrells_c(&risks, &times, &events)?;

    let g_train = censoring_kaplan_meier(&train.times(), &train.events())?;
    let tau = times
        .iter()
        .zip(&events)
        .filter(|(_, &e)| e)
        .map(|(&t, _)| t)
        .fold(f64::NEG_INFINITY, f64::max);
    if !tau.is_finite() {
        return Err(Error::Data("test split has no observed events".into()));
    }
    let (uno, _) = unos_c(&risks, &times, &events, &g_train, tau)?;

    let event_km = kaplan_meier(&train.times(), &train.events())?;
    let ibs_score = ibs(test.records(), &dists, &event_km, &train.times())?;
    let censdcal = cens_dcal(&dists, test.records())?;
    let cal_s = calibration_curve(&dists, test.records(), CalibrationVersion::Survival)?;
    let cal_f = calibration_curve(&dists, test.records(), CalibrationVersion::Density)?;
    let (cal_s_slope, cal_s_intercept) = ols_fit(&cal_s)?;
    let (cal_f_slope, cal_f_intercept) = ols_fit(&cal_f)?;

    Ok(MetricReport {
        mae: mae_scaled,
        ibs: ibs_score.value,
        harrell_c: harrell,
        uno_c: uno,
        censdcal,
        cal_s_slope,
        cal_s_intercept,
        cal_f_slope,
        cal_f_intercept,
    })
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SavedModel {
    format_version: u32,
    #[serde(flatten)]
    model: SurvivalModel,
}

impl SurvivalModel {
    /// Serializes the model as versioned JSON.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let saved = SavedModel {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        let json = serde_json::to_string_pretty(&saved)
            .map_err(|e| Error::Serialization(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        let saved: SavedModel =
            serde_json::from_str(&raw).map_err(|e| Error::Serialization(e.to_string()))?;
        if saved.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported model format version {}",
                saved.format_version
            )));
        }
        let model = saved.model;
        if model.params.values.len() != model.mlp_config.param_count() {
            return Err(Error::Serialization(
                "parameter vector does not match the network configuration".into(),
            ));
        }
        Ok(model)
    }
}
