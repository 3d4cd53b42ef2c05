//! Per-round metrics, run records, and their on-disk forms.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::harness::config::ExperimentConfig;
use crate::training::Evaluation;

pub const METRICS_HEADER: &str =
    "round,accuracy,loss,selected_index,averaged_count,f_hat,wall_time_s";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    /// 1-based.
    pub round: usize,
    pub test_accuracy: f64,
    pub test_loss: f64,
    pub selected_index: Option<usize>,
    pub averaged_count: usize,
    pub f_hat_of_winner: Option<usize>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// The model before the first round.
    pub initial: Evaluation,
    /// Mean accuracy over the last (up to) 10 rounds; `None` for zero rounds.
    pub final_mean_accuracy: Option<f64>,
    pub max_accuracy: Option<f64>,
    /// Rounds whose submissions contained non-finite values and were
    /// skipped, leaving the global model unchanged.
    pub rejected_rounds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub metrics: Vec<RoundMetrics>,
    pub summary: RunSummary,
}

impl RunRecord {
    pub fn accuracies(&self) -> Vec<f64> {
        self.metrics.iter().map(|m| m.test_accuracy).collect()
    }
}

/// Mean of the last `k` values (all of them if fewer).
pub fn tail_mean(values: &[f64], k: usize) -> Option<f64> {
    let tail = &values[values.len().saturating_sub(k)..];
    (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Population standard deviation of the last `k` values.
pub fn tail_std(values: &[f64], k: usize) -> Option<f64> {
    let tail = &values[values.len().saturating_sub(k)..];
    let mean = tail_mean(tail, k)?;
    let var = tail.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / tail.len() as f64;
    Some(var.sqrt())
}

fn opt_field<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The metrics table as CSV text (LF line endings, shortest round-trip
/// float formatting).
pub fn metrics_csv(metrics: &[RoundMetrics]) -> String {
    let mut out = String::with_capacity(64 * (metrics.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for m in metrics {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.round,
            m.test_accuracy,
            m.test_loss,
            opt_field(m.selected_index),
            m.averaged_count,
            opt_field(m.f_hat_of_winner),
            m.wall_time
        )
        .expect("writing to a String");
    }
    out
}

/// Companion record path for a metrics CSV: `runs/a.csv` -> `runs/a.run.json`.
pub fn record_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("run.json")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the metrics CSV to `csv_path` and the full run record next to it.
/// Returns the record path.
pub fn write_metrics(
    record: &RunRecord,
    csv_path: impl AsRef<Path>,
) -> Result<PathBuf, HarnessError> {
    let csv_path = csv_path.as_ref();
    if let Some(parent) = csv_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(csv_path, metrics_csv(&record.metrics)).map_err(io_err(csv_path))?;
    let json_path = record_path(csv_path);
    let json = serde_json::to_string_pretty(record).expect("record is serializable");
    fs::write(&json_path, json + "\n").map_err(io_err(&json_path))?;
    Ok(json_path)
}

/// Writes `metrics.csv`, `metrics.run.json` and a re-runnable `config.toml`
/// into `dir`. Returns the CSV path.
pub fn write_run_dir(record: &RunRecord, dir: impl AsRef<Path>) -> Result<PathBuf, HarnessError> {
    let dir = dir.as_ref();
    let csv_path = dir.join("metrics.csv");
    write_metrics(record, &csv_path)?;
    let config_path = dir.join("config.toml");
    fs::write(&config_path, record.config.to_toml()).map_err(io_err(&config_path))?;
    Ok(csv_path)
}

pub fn read_metrics(csv_path: impl AsRef<Path>) -> Result<Vec<RoundMetrics>, HarnessError> {
    let path = csv_path.as_ref();
    let bad = |message: String| HarnessError::Metrics {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != METRICS_HEADER {
        return Err(bad(format!(
            "unexpected header, expected `{METRICS_HEADER}`"
        )));
    }
    let mut metrics = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let field = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64, HarnessError> {
            field(k)
                .parse()
                .map_err(|_| bad(format!("line {line}: bad number `{}`", field(k))))
        };
        let count = |k: usize| -> Result<usize, HarnessError> {
            field(k)
                .parse()
                .map_err(|_| bad(format!("line {line}: bad count `{}`", field(k))))
        };
        let opt = |k: usize| -> Result<Option<usize>, HarnessError> {
            if field(k).is_empty() {
                Ok(None)
            } else {
                count(k).map(Some)
            }
        };
        metrics.push(RoundMetrics {
            round: count(0)?,
            test_accuracy: num(1)?,
            test_loss: num(2)?,
            selected_index: opt(3)?,
            averaged_count: count(4)?,
            f_hat_of_winner: opt(5)?,
            wall_time: num(6)?,
        });
    }
    Ok(metrics)
}

pub fn read_run_record(path: impl AsRef<Path>) -> Result<RunRecord, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Metrics {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// One row of a `compare` table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub aggregator: Option<String>,
    pub attack: Option<String>,
    pub rounds: usize,
    pub final_accuracy: Option<f64>,
    pub final10_mean: Option<f64>,
    pub max_accuracy: Option<f64>,
    pub last20_std: Option<f64>,
}

fn run_label(csv_path: &Path) -> String {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned());
    match stem.as_deref() {
        Some("metrics") | None => csv_path
            .parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| csv_path.display().to_string()),
        Some(s) => s.to_string(),
    }
}

/// Summarizes one metrics CSV, adding aggregator and attack names when the
/// companion record is present.
pub fn summarize_csv(csv_path: impl AsRef<Path>) -> Result<ComparisonRow, HarnessError> {
    let csv_path = csv_path.as_ref();
    let metrics = read_metrics(csv_path)?;
    let acc: Vec<f64> = metrics.iter().map(|m| m.test_accuracy).collect();
    let record = read_run_record(record_path(csv_path)).ok();
    Ok(ComparisonRow {
        label: run_label(csv_path),
        aggregator: record
            .as_ref()
            .map(|r| r.config.aggregator().name().to_string()),
        attack: record
            .as_ref()
            .map(|r| serde_json::to_value(r.config.attack.kind).expect("serializable"))
            .and_then(|v| v.as_str().map(str::to_string)),
        rounds: metrics.len(),
        final_accuracy: acc.last().copied(),
        final10_mean: tail_mean(&acc, 10),
        max_accuracy: acc.iter().copied().reduce(f64::max),
        last20_std: tail_std(&acc, 20),
    })
}

/// Markdown table of run summaries; accuracies in percent.
pub fn comparison_markdown(rows: &[ComparisonRow]) -> String {
    let pct = |v: Option<f64>| {
        v.map(|x| format!("{:.2}", 100.0 * x))
            .unwrap_or_else(|| "-".into())
    };
    let mut out = String::from(
        "| run | aggregator | attack | rounds | final | final-10 mean | max | last-20 std |\n\
         |---|---|---|---:|---:|---:|---:|---:|\n",
    );
    for r in rows {
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.label,
            r.aggregator.as_deref().unwrap_or("-"),
            r.attack.as_deref().unwrap_or("-"),
            r.rounds,
            pct(r.final_accuracy),
            pct(r.final10_mean),
            pct(r.max_accuracy),
            pct(r.last20_std),
        )
        .expect("writing to a String");
    }
    out
}

/// CSV form of the comparison, raw fractions.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "run,aggregator,attack,rounds,final_accuracy,final10_mean,max_accuracy,last20_std\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.label,
            r.aggregator.as_deref().unwrap_or(""),
            r.attack.as_deref().unwrap_or(""),
            r.rounds,
            opt_field(r.final_accuracy),
            opt_field(r.final10_mean),
            opt_field(r.max_accuracy),
            opt_field(r.last20_std),
        )
        .expect("writing to a String");
    }
    out
}
