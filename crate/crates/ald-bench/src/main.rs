use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ald_bench::config::ExperimentConfig;
use ald_bench::report::{emit_report, ReportFormat};
use ald_bench::runner::{
    aggregate, build_split, compare_methods, fit_method, load_results, run,
};
use ald_bench::stats::TTestKind;
use ald_survival::datagen::{generate, SyntheticConfig};
use ald_survival::dataio::write_csv;
use ald_survival::models::{evaluate, ModelKind, SurvivalModel};
use ald_survival::Result;

#[derive(Parser)]
#[command(
    name = "ald-bench",
    about = "Survival model benchmark runner: synthetic data generation, training, evaluation, multi-seed sweeps, and significance reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and export it as CSV.
    Generate {
        /// Synthetic dataset name (e.g. norm_linear, lognorm_heavy).
        #[arg(long)]
        dataset: String,
        /// Number of records.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a single model on the training split and save it.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Method to train; defaults to the first method in the config.
        #[arg(long)]
        method: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output model path (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a saved model on the test split defined by the config.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional output path for the metric report JSON (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full multi-seed sweep and emit aggregate reports.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results.jsonl and reports.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        /// Number of runs to execute in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Skip significance testing even with multiple methods.
        #[arg(long, default_value_t = false)]
        no_compare: bool,
    },
    /// Significance report from a previously written results.jsonl.
    Compare {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Reference method compared against every other method.
        #[arg(long, default_value = "ald")]
        reference: String,
        #[arg(long, default_value = "welch")]
        ttest: String,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { dataset, n, seed, out } => {
            let config = SyntheticConfig::parse(&dataset)?;
            let data = generate(config, n, seed)?;
            write_csv(&data, &out)?;
            println!(
                "wrote {} records ({} censored) to {}",
                data.len(),
                (data.censoring_proportion() * data.len() as f64).round() as usize,
                out.display()
            );
            Ok(())
        }
        Command::Train { config, method, seed, out } => {
            let config = ExperimentConfig::from_path(&config)?;
            let method = match method {
                Some(m) => ModelKind::parse(&m)?,
                None => config.model_kinds()[0],
            };
            let settings = config.resolve(method);
            let (train_split, _) = build_split(&config.dataset, seed)?;
            let model = fit_method(method, &train_split, &settings, seed)?;
            model.save(&out)?;
            println!(
                "trained {} on {} ({} records, best epoch {}); saved to {}",
                method.name(),
                config.dataset.label(),
                train_split.len(),
                model.train_log.best_epoch,
                out.display()
            );
            Ok(())
        }
        Command::Evaluate { model, config, seed, out } => {
            let config = ExperimentConfig::from_path(&config)?;
            let model = SurvivalModel::load(&model)?;
            let (train_split, test_split) = build_split(&config.dataset, seed)?;
            let report = evaluate(
                &model,
                &train_split,
                &test_split,
                config.dataset.is_synthetic(),
            )?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| ald_survival::Error::Serialization(e.to_string()))?;
            match out {
                Some(path) => {
                    std::fs::write(&path, &json)?;
                    println!("wrote metrics to {}", path.display());
                }
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Bench { config, out, format, jobs, no_compare } => {
            let config = ExperimentConfig::from_path(&config)?;
            let format = ReportFormat::parse(&format)?;
            let results = run(&config, Some(&out), jobs)?;
            let aggregates = aggregate(&results);
            let comparisons = if !no_compare && config.methods.len() > 1 && config.seeds >= 2 {
                compare_methods(&results, "ald", 0.05, TTestKind::parse(&config.ttest)?)?
            } else {
                Vec::new()
            };
            let written = emit_report(&aggregates, &comparisons, format, &out)?;
            let failed = results.iter().filter(|r| r.metrics().is_none()).count();
            println!(
                "completed {} runs ({failed} failed); reports: {}",
                results.len(),
                written
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
        Command::Compare { results, out, format, alpha, reference, ttest } => {
            let format = ReportFormat::parse(&format)?;
            let results = load_results(&results)?;
            let comparisons =
                compare_methods(&results, &reference, alpha, TTestKind::parse(&ttest)?)?;
            let aggregates = aggregate(&results);
            let written = emit_report(&aggregates, &comparisons, format, &out)?;
            println!(
                "compared {} cells; reports: {}",
                comparisons.len(),
                written
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({ "error": e.to_string() });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
