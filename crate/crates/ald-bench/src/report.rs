//! Deterministic report emission in JSON, CSV, or Markdown.
//!
//! Layouts are stable: rows are sorted by (dataset, method), metric columns
//! follow the fixed metric order, and the only non-deterministic field is a
//! single `generated_at` header entry.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use ald_survival::{Error, Result};

use crate::runner::{AggregateCell, METRIC_NAMES};
use crate::stats::Comparison;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }

    fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Sorted (dataset, method) row keys.
fn row_keys(aggregates: &[AggregateCell]) -> Vec<(String, String)> {
    let mut keys: Vec<(String, String)> = aggregates
        .iter()
        .map(|c| (c.dataset.clone(), c.method.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

fn cell_for<'a>(
    aggregates: &'a [AggregateCell],
    dataset: &str,
    method: &str,
    metric: &str,
) -> Option<&'a AggregateCell> {
    aggregates
        .iter()
        .find(|c| c.dataset == dataset && c.method == method && c.metric == metric)
}

fn render_aggregates(aggregates: &[AggregateCell], format: ReportFormat) -> String {
    let mut sorted = aggregates.to_vec();
    sorted.sort_by(|a, b| {
        (&a.dataset, &a.method, &a.metric).cmp(&(&b.dataset, &b.method, &b.metric))
    });
    match format {
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Payload<'a> {
                generated_at: u64,
                aggregates: &'a [AggregateCell],
            }
            serde_json::to_string_pretty(&Payload {
                generated_at: timestamp(),
                aggregates: &sorted,
            })
            .expect("serializable aggregates")
        }
        ReportFormat::Csv => {
            let mut out = String::from("dataset,method,metric,mean,std,n\n");
            for c in &sorted {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    c.dataset, c.method, c.metric, c.mean, c.std, c.n
                ));
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = format!("generated_at: {}\n\n", timestamp());
            out.push_str("| dataset | method |");
            for m in METRIC_NAMES {
                out.push_str(&format!(" {m} |"));
            }
            out.push('\n');
            out.push_str("|---|---|");
            for _ in METRIC_NAMES {
                out.push_str("---|");
            }
            out.push('\n');
            for (dataset, method) in row_keys(&sorted) {
                out.push_str(&format!("| {dataset} | {method} |"));
                for metric in METRIC_NAMES {
                    match cell_for(&sorted, &dataset, &method, metric) {
                        Some(c) => out.push_str(&format!(" {:.3} ± {:.3} |", c.mean, c.std)),
                        None => out.push_str(" - |"),
                    }
                }
                out.push('\n');
            }
            out
        }
    }
}

fn render_comparisons(comparisons: &[Comparison], format: ReportFormat) -> String {
    let mut sorted = comparisons.to_vec();
    sorted.sort_by(|a, b| {
        (&a.baseline, &a.dataset, &a.metric).cmp(&(&b.baseline, &b.dataset, &b.metric))
    });
    match format {
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Payload<'a> {
                generated_at: u64,
                comparisons: &'a [Comparison],
            }
            serde_json::to_string_pretty(&Payload {
                generated_at: timestamp(),
                comparisons: &sorted,
            })
            .expect("serializable comparisons")
        }
        ReportFormat::Csv => {
            let mut out =
                String::from("baseline,dataset,metric,p_value,significant,outcome\n");
            for c in &sorted {
                out.push_str(&format!(
                    "{},{},{},{},{},{:?}\n",
                    c.baseline, c.dataset, c.metric, c.p_value, c.significant, c.outcome
                ));
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = format!("generated_at: {}\n\n", timestamp());
            out.push_str("| baseline | dataset | metric | p | significant | outcome |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for c in &sorted {
                out.push_str(&format!(
                    "| {} | {} | {} | {:.4} | {} | {:?} |\n",
                    c.baseline, c.dataset, c.metric, c.p_value, c.significant, c.outcome
                ));
            }
            out
        }
    }
}

/// Writes `aggregates.<ext>` (and `comparisons.<ext>` when comparisons are
/// present) under `out_dir`, returning the written paths.
pub fn emit_report(
    aggregates: &[AggregateCell],
    comparisons: &[Comparison],
    format: ReportFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let agg_path = out_dir.join(format!("aggregates.{}", format.extension()));
    std::fs::write(&agg_path, render_aggregates(aggregates, format))?;
    written.push(agg_path);
    if !comparisons.is_empty() {
        let cmp_path = out_dir.join(format!("comparisons.{}", format.extension()));
        std::fs::write(&cmp_path, render_comparisons(comparisons, format))?;
        written.push(cmp_path);
    }
    Ok(written)
}
