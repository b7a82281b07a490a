//! End-to-end smoke tests of the `ald-bench` binary: every subcommand, the
//! CSV-backed dataset path, and the machine-readable failure contract.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ald-bench"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ald_cli_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const CONFIG: &str = r#"
methods = ["ald", "lognorm"]
seeds = 2

[dataset]
kind = "synthetic"
name = "norm_linear"
n_train = 150
n_test = 100

[overrides.ald]
epochs = 12
[overrides.lognorm]
epochs = 12
"#;

#[test]
fn generate_train_evaluate_round_trip() {
    let dir = workdir("flow");
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, CONFIG).unwrap();

    let csv_path = dir.join("data.csv");
    let out = bin()
        .args(["generate", "--dataset", "norm_linear", "--n", "200", "--seed", "3"])
        .arg("--out")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(csv_path.exists());

    let model_path = dir.join("model.json");
    let out = bin()
        .args(["train", "--method", "ald", "--seed", "1"])
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&model_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let metrics_path = dir.join("metrics.json");
    let out = bin()
        .args(["evaluate", "--seed", "1"])
        .arg("--model")
        .arg(&model_path)
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&metrics_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&metrics_path).unwrap()).unwrap();
    for key in [
        "mae",
        "ibs",
        "harrell_c",
        "uno_c",
        "censdcal",
        "cal_s_slope",
        "cal_s_intercept",
        "cal_f_slope",
        "cal_f_intercept",
    ] {
        assert!(report.get(key).is_some(), "missing metric key {key}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bench_then_compare_from_results() {
    let dir = workdir("bench");
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, CONFIG).unwrap();

    let out_dir = dir.join("out");
    let out = bin()
        .args(["bench", "--jobs", "2", "--format", "markdown"])
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results_path = out_dir.join("results.jsonl");
    assert!(results_path.exists());
    let lines = std::fs::read_to_string(&results_path).unwrap();
    assert_eq!(lines.lines().count(), 4, "one line per completed run");
    assert!(out_dir.join("aggregates.md").exists());
    assert!(out_dir.join("comparisons.md").exists());

    let cmp_dir = dir.join("cmp");
    let out = bin()
        .args(["compare", "--format", "json", "--alpha", "0.05"])
        .arg("--results")
        .arg(&results_path)
        .arg("--out")
        .arg(&cmp_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(cmp_dir.join("comparisons.json")).unwrap(),
    )
    .unwrap();
    assert!(parsed["comparisons"].as_array().unwrap().len() >= 9);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_backed_dataset_runs_end_to_end() {
    let dir = workdir("csvdata");
    let csv_path = dir.join("synth.csv");
    let out = bin()
        .args(["generate", "--dataset", "norm_heavy", "--n", "300", "--seed", "9"])
        .arg("--out")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(out.status.success());

    let config = format!(
        r#"
methods = ["ald"]
seeds = 2

[dataset]
kind = "csv"
path = "{}"
test_fraction = 0.25

[dataset.schema]
feature_cols = ["x0", "x1", "x2", "x3"]
time_col = "time"
event_col = "event"
o_true_col = "o_true"

[overrides.ald]
epochs = 10
"#,
        csv_path.display()
    );
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, &config).unwrap();
    let out_dir = dir.join("out");
    let out = bin()
        .arg("bench")
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = std::fs::read_to_string(out_dir.join("results.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    for line in lines.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["outcome"]["status"], "ok", "{row}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn failures_exit_nonzero_with_json_error() {
    let out = bin()
        .args([
            "generate",
            "--dataset",
            "not_a_dataset",
            "--n",
            "10",
            "--out",
            "/tmp/never_written.csv",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let parsed: serde_json::Value =
        serde_json::from_str(stderr.trim()).expect("stderr should be machine-readable JSON");
    assert!(parsed["error"].as_str().unwrap().contains("not_a_dataset"));
}
