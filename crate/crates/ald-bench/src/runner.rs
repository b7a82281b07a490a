//! Sweep execution: per (method, seed) fit-and-evaluate runs with crash-safe
//! incremental persistence, plus per-cell aggregation and method comparison.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use ald_survival::datagen::{self, SyntheticConfig};
use ald_survival::dataio::{load_csv, split};
use ald_survival::metrics::MetricReport;
use ald_survival::models::{
    evaluate, fit_ald, fit_cqrnn, fit_lognorm, negative_support_diagnostic, ModelKind,
    NegativeSupportSummary, SurvivalModel,
};
use ald_survival::{Dataset, Error, Result};

use crate::config::{DatasetSpec, ExperimentConfig, ResolvedSettings};

pub const METRIC_NAMES: [&str; 9] = [
    "mae",
    "ibs",
    "harrell_c",
    "uno_c",
    "censdcal",
    "cal_s_slope",
    "cal_s_intercept",
    "cal_f_slope",
    "cal_f_intercept",
];

pub fn metric_value(report: &MetricReport, name: &str) -> Option<f64> {
    match name {
        "mae" => Some(report.mae),
        "ibs" => Some(report.ibs),
        "harrell_c" => Some(report.harrell_c),
        "uno_c" => Some(report.uno_c),
        "censdcal" => Some(report.censdcal),
        "cal_s_slope" => Some(report.cal_s_slope),
        "cal_s_intercept" => Some(report.cal_s_intercept),
        "cal_f_slope" => Some(report.cal_f_slope),
        "cal_f_intercept" => Some(report.cal_f_intercept),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Ok {
        metrics: MetricReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        negative_support: Option<NegativeSupportSummary>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainSummary {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub diagnostics: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub method: String,
    pub seed: u64,
    pub outcome: RunOutcome,
    pub wall_secs: f64,
    pub train_summary: TrainSummary,
}

impl RunResult {
    pub fn metrics(&self) -> Option<&MetricReport> {
        match &self.outcome {
            RunOutcome::Ok { metrics, .. } => Some(metrics),
            RunOutcome::Failed { .. } => None,
        }
    }
}

/// Builds the per-seed (train, test) split. Synthetic data are generated
/// fresh per seed; CSV data are split per seed. The split depends only on the
/// dataset and seed, so methods compared at one seed share it.
pub fn build_split(spec: &DatasetSpec, seed: u64) -> Result<(Dataset, Dataset)> {
    match spec {
        DatasetSpec::Synthetic { name, n_train, n_test } => {
            let config = SyntheticConfig::parse(name)?;
            let total = n_train + n_test;
            let data = datagen::generate(config, total, seed)?;
            let test_fraction = *n_test as f64 / total as f64;
            let (train, test) = split(&data, test_fraction, seed)?;
            Ok((train, test))
        }
        DatasetSpec::Csv { path, test_fraction, schema } => {
            let data = load_csv(path, schema)?;
            let (train, test) = split(&data, *test_fraction, seed)?;
            Ok((train, test))
        }
    }
}

/// Fits one method with resolved settings on a prepared split.
pub fn fit_method(
    method: ModelKind,
    train: &Dataset,
    settings: &ResolvedSettings,
    seed: u64,
) -> Result<SurvivalModel> {
    let mut train_cfg = settings.train.clone();
    train_cfg.seed = seed;
    match method {
        ModelKind::Ald => fit_ald(train, &settings.net, &train_cfg, &settings.fit),
        ModelKind::Lognorm => fit_lognorm(train, &settings.net, &train_cfg, &settings.fit),
        ModelKind::Cqrnn => fit_cqrnn(
            train,
            &settings.grid,
            &settings.net,
            &train_cfg,
            &settings.fit,
        ),
    }
}

fn execute_run(config: &ExperimentConfig, method: ModelKind, seed: u64) -> RunResult {
    let started = Instant::now();
    let dataset_label = config.dataset.label();
    let settings = config.resolve(method);
    let attempt = (|| -> Result<(MetricReport, Option<NegativeSupportSummary>, TrainSummary)> {
        let (train, test) = build_split(&config.dataset, seed)?;
        let model = fit_method(method, &train, &settings, seed)?;
        let metrics = evaluate(&model, &train, &test, config.dataset.is_synthetic())?;
        if !metrics.is_finite() {
            return Err(Error::NonFinite("metric report has non-finite values".into()));
        }
        let negative_support = match method {
            ModelKind::Ald => Some(negative_support_diagnostic(&model, &test)?),
            _ => None,
        };
        let summary = TrainSummary {
            epochs_run: model.train_log.epochs_run,
            best_epoch: model.train_log.best_epoch,
            best_val_loss: model.train_log.best_val_loss,
            diagnostics: model.train_log.diagnostics.clone(),
        };
        Ok((metrics, negative_support, summary))
    })();
    let wall_secs = started.elapsed().as_secs_f64();
    match attempt {
        Ok((metrics, negative_support, train_summary)) => RunResult {
            dataset: dataset_label,
            method: method.name().into(),
            seed,
            outcome: RunOutcome::Ok {
                metrics,
                negative_support,
            },
            wall_secs,
            train_summary,
        },
        Err(e) => RunResult {
            dataset: dataset_label,
            method: method.name().into(),
            seed,
            outcome: RunOutcome::Failed {
                error: e.to_string(),
            },
            wall_secs,
            train_summary: TrainSummary::default(),
        },
    }
}

/// Runs the full sweep: every method at every seed. Completed runs are
/// appended to `results.jsonl` under `out_dir` as they finish, so a killed
/// sweep loses at most the in-flight runs. Per-run failures are recorded and
/// skipped, not fatal.
pub fn run(config: &ExperimentConfig, out_dir: Option<&Path>, jobs: usize) -> Result<Vec<RunResult>> {
    config.validate()?;
    let methods = config.model_kinds();
    let tasks: Vec<(ModelKind, u64)> = methods
        .iter()
        .flat_map(|&m| (0..config.seeds).map(move |s| (m, config.base_seed + s)))
        .collect();

    let writer = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(dir.join("results.jsonl"))?;
            Some(Mutex::new(file))
        }
        None => None,
    };

    let slots: Vec<Mutex<Option<RunResult>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    let workers = jobs.max(1).min(tasks.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::SeqCst);
                if i >= tasks.len() {
                    break;
                }
                let (method, seed) = tasks[i];
                let result = execute_run(config, method, seed);
                if let Some(w) = &writer {
                    let line = serde_json::to_string(&result).expect("serializable result");
                    let mut file = w.lock().expect("writer lock");
                    let _ = writeln!(file, "{line}");
                    let _ = file.flush();
                }
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });

    Ok(slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("all tasks ran"))
        .collect())
}

/// Reads back a `results.jsonl` produced by [`run`].
pub fn load_results<P: AsRef<Path>>(path: P) -> Result<Vec<RunResult>> {
    let raw = std::fs::read_to_string(path)?;
    raw.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Serialization(e.to_string())))
        .collect()
}

/// Sample mean and (n-1)-denominator standard deviation for one
/// (dataset, method, metric) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateCell {
    pub dataset: String,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn aggregate(results: &[RunResult]) -> Vec<AggregateCell> {
    let mut keys: Vec<(String, String)> = results
        .iter()
        .filter(|r| r.metrics().is_some())
        .map(|r| (r.dataset.clone(), r.method.clone()))
        .collect();
    keys.sort();
    keys.dedup();

    let mut cells = Vec::new();
    for (dataset, method) in keys {
        for metric in METRIC_NAMES {
            let values: Vec<f64> = results
                .iter()
                .filter(|r| r.dataset == dataset && r.method == method)
                .filter_map(|r| r.metrics())
                .filter_map(|m| metric_value(m, metric))
                .collect();
            if values.is_empty() {
                continue;
            }
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            cells.push(AggregateCell {
                dataset: dataset.clone(),
                method: method.clone(),
                metric: metric.into(),
                mean,
                std,
                n,
            });
        }
    }
    cells
}

/// Per-seed metric values for one (dataset, method) pair, ordered by seed.
pub fn seed_values(
    results: &[RunResult],
    dataset: &str,
    method: &str,
    metric: &str,
) -> Vec<f64> {
    let mut rows: Vec<(u64, f64)> = results
        .iter()
        .filter(|r| r.dataset == dataset && r.method == method)
        .filter_map(|r| {
            r.metrics()
                .and_then(|m| metric_value(m, metric))
                .map(|v| (r.seed, v))
        })
        .collect();
    rows.sort_by_key(|&(seed, _)| seed);
    rows.into_iter().map(|(_, v)| v).collect()
}

/// Compares the reference method against every other method present.
/// P-values come from a two-sample t-test on orientation-transformed per-seed
/// values; Benjamini-Hochberg runs per baseline over its whole family of
/// (dataset, metric) pairs.
pub fn compare_methods(
    results: &[RunResult],
    reference: &str,
    alpha: f64,
    kind: crate::stats::TTestKind,
) -> Result<Vec<crate::stats::Comparison>> {
    use crate::stats::{benjamini_hochberg, orient_lower_is_better, t_test, Comparison, Outcome};

    let mut datasets: Vec<String> = results.iter().map(|r| r.dataset.clone()).collect();
    datasets.sort();
    datasets.dedup();
    let mut baselines: Vec<String> = results
        .iter()
        .map(|r| r.method.clone())
        .filter(|m| m != reference)
        .collect();
    baselines.sort();
    baselines.dedup();

    let mut comparisons = Vec::new();
    for baseline in &baselines {
        let mut family: Vec<Comparison> = Vec::new();
        for dataset in &datasets {
            for metric in METRIC_NAMES {
                let a: Vec<f64> = seed_values(results, dataset, reference, metric)
                    .into_iter()
                    .map(|v| orient_lower_is_better(metric, v))
                    .collect();
                let b: Vec<f64> = seed_values(results, dataset, baseline, metric)
                    .into_iter()
                    .map(|v| orient_lower_is_better(metric, v))
                    .collect();
                if a.len() < 2 || b.len() < 2 {
                    continue;
                }
                let p = t_test(&a, &b, kind)?;
                let ref_mean = a.iter().sum::<f64>() / a.len() as f64;
                let base_mean = b.iter().sum::<f64>() / b.len() as f64;
                family.push(Comparison {
                    dataset: dataset.clone(),
                    metric: metric.into(),
                    baseline: baseline.clone(),
                    p_value: p,
                    significant: false,
                    outcome: Outcome::Same,
                    reference_mean: ref_mean,
                    baseline_mean: base_mean,
                });
            }
        }
        let pvals: Vec<f64> = family.iter().map(|c| c.p_value).collect();
        let rejected = benjamini_hochberg(&pvals, alpha);
        for (c, sig) in family.iter_mut().zip(rejected) {
            c.significant = sig;
            c.outcome = if !sig {
                Outcome::Same
            } else if c.reference_mean < c.baseline_mean {
                Outcome::Better
            } else {
                Outcome::Worse
            };
        }
        comparisons.extend(family);
    }
    Ok(comparisons)
}
