//! Krum-family Byzantine-robust aggregation and a deterministic
//! federated-learning simulator.
//!
//! The aggregation rules live in [`aggregation`]; [`changepoint`] holds the
//! Byzantine-count estimator used by rKrum and ArKrum. [`harness`] wires data,
//! training and attacks into a reproducible round loop.

pub mod aggregation;
pub mod attacks;
pub mod changepoint;
pub mod data;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod training;

pub use aggregation::{
    aggregate_arkrum, aggregate_arkrum_with, aggregate_krum, aggregate_mean, aggregate_mkrum,
    aggregate_rkrum, AggregationResult, Aggregator, ArKrumOptions, DistanceMatrix, UpdateSet,
    UpdateVector,
};
pub use attacks::{AttackKind, AttackSpec, LabelMap};
pub use changepoint::{
    estimate_f, filter_extreme_values, sse_split, ByzantineEstimate, FilterOutcome, SseSplit,
};
pub use data::{ClientShard, Dataset, PartitionSpec};
pub use error::{AggregationError, ConfigError, DataError, HarnessError, TrainingError};
pub use harness::{
    parse_config, run_experiment, ExperimentConfig, RoundMetrics, RunRecord, Simulation,
};
pub use training::{Evaluation, ModelLayout, ModelParams, TrainConfig};
