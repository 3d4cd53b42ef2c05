//! Config-driven federated simulation: partition, local training, attacks,
//! aggregation, evaluation, and metrics persistence.

pub mod config;
pub mod metrics;
mod run;

pub use config::{
    parse_config, parse_config_str, AggregatorKind, AttackConfig, DatasetSource, ExperimentConfig,
    ModelConfig, PartitionConfig,
};
pub use metrics::{
    comparison_csv, comparison_markdown, read_metrics, read_run_record, record_path, summarize_csv,
    tail_mean, tail_std, write_metrics, write_run_dir, ComparisonRow, RoundMetrics, RunRecord,
    RunSummary, METRICS_HEADER,
};
pub use run::{load_dataset, run_experiment, RoundOutcome, Simulation};
