//! The federated training loop.

use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::aggregation::{AggregationResult, Aggregator, UpdateSet, UpdateVector};
use crate::attacks::{self, AttackKind, AttackSpec};
use crate::data::{self, Dataset, PartitionSpec};
use crate::error::{AggregationError, HarnessError};
use crate::harness::config::{DatasetSource, ExperimentConfig};
use crate::harness::metrics::{tail_mean, RoundMetrics, RunRecord, RunSummary};
use crate::rng::{stream, Purpose};
use crate::training::{self, Evaluation, ModelLayout, ModelParams};

/// Loads or generates the dataset and returns `(train, test)`.
pub fn load_dataset(
    source: &DatasetSource,
    master_seed: u64,
) -> Result<(Dataset, Dataset), HarnessError> {
    match source {
        DatasetSource::Synthetic {
            classes,
            dim,
            per_class,
            separation,
            test_fraction,
        } => {
            let mut rng = stream(master_seed, Purpose::Dataset, 0, 0);
            let all = data::generate_synthetic(*classes, *dim, *per_class, *separation, &mut rng)?;
            let mut rng = stream(master_seed, Purpose::Split, 0, 0);
            Ok(all.train_test_split(1.0 - test_fraction, &mut rng)?)
        }
        DatasetSource::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
        } => Ok((
            data::load_idx(train_images, train_labels)?,
            data::load_idx(test_images, test_labels)?,
        )),
        DatasetSource::Csv {
            path,
            test_fraction,
        } => {
            let all = data::load_feature_csv(path)?;
            let mut rng = stream(master_seed, Purpose::Split, 0, 0);
            Ok(all.train_test_split(1.0 - test_fraction, &mut rng)?)
        }
    }
}

/// What happened in one round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub metrics: RoundMetrics,
    /// `None` when the round was rejected for non-finite submissions.
    pub aggregation: Option<AggregationResult>,
}

/// A federation in progress: client data, current global model, and the
/// round counter.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: ExperimentConfig,
    shards: Vec<Dataset>,
    test: Dataset,
    layout: ModelLayout,
    aggregator: Aggregator,
    attack: AttackSpec,
    byzantine: Vec<bool>,
    global: ModelParams,
    round: usize,
    rejected: Vec<usize>,
}

impl Simulation {
    /// Validates the config, loads and partitions the data, and initializes
    /// the global model. Nothing is trained.
    pub fn new(config: ExperimentConfig) -> Result<Self, HarnessError> {
        let mut config = config.resolve()?;
        let (train, test) = load_dataset(&config.dataset, config.master_seed)?;
        config.resolve_for_data(train.dim(), train.classes());
        let sizes = config.model.layer_sizes.clone().expect("resolved");
        let layout = ModelLayout::new(sizes, config.model.leaky_slope)?;
        if layout.input_dim() != train.dim() {
            return Err(crate::error::ConfigError::Invalid {
                key: "model.layer_sizes",
                message: format!(
                    "input width {} does not match feature dimension {}",
                    layout.input_dim(),
                    train.dim()
                ),
            }
            .into());
        }
        let classes = train.classes().max(test.classes());
        if layout.outputs() < classes {
            return Err(crate::error::ConfigError::Invalid {
                key: "model.layer_sizes",
                message: format!(
                    "output width {} is below the class count {classes}",
                    layout.outputs()
                ),
            }
            .into());
        }

        let spec = PartitionSpec {
            n_clients: config.n_clients,
            alpha: config.partition.alpha,
            seed: config.partition_seed(),
        };
        let parts = data::dirichlet_partition(&train, &spec)?;
        let attack = config.attack_spec();
        let mut byzantine = vec![false; config.n_clients];
        for i in config.byzantine_clients() {
            byzantine[i] = true;
        }
        let mut shards = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let shard = train.subset(&part.indices);
            if byzantine[i] && attack.kind == AttackKind::LabelFlipping {
                shards.push(attacks::flip_labels(&shard, &attack.label_map)?);
            } else {
                shards.push(shard);
            }
        }
        let global = training::init_model(
            &layout,
            &mut stream(config.master_seed, Purpose::ModelInit, 0, 0),
        );
        info!(
            "{} clients ({} byzantine), {} train / {} test rows, {} parameters",
            config.n_clients,
            config.byzantine_count,
            train.len(),
            test.len(),
            layout.param_count()
        );
        Ok(Self {
            aggregator: config.aggregator(),
            config,
            shards,
            test,
            layout,
            attack,
            byzantine,
            global,
            round: 0,
            rejected: Vec::new(),
        })
    }

    /// The resolved config, including data-dependent defaults.
    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn global(&self) -> &ModelParams {
        &self.global
    }

    pub fn layout(&self) -> &ModelLayout {
        &self.layout
    }

    /// Completed rounds.
    pub fn round(&self) -> usize {
        self.round
    }

    /// Client `i`'s training data as the client sees it (flipped labels
    /// included).
    pub fn client_data(&self, i: usize) -> &Dataset {
        &self.shards[i]
    }

    pub fn test_set(&self) -> &Dataset {
        &self.test
    }

    pub fn is_byzantine(&self, i: usize) -> bool {
        self.byzantine[i]
    }

    pub fn evaluate(&self) -> Result<Evaluation, HarnessError> {
        Ok(training::evaluate(&self.global, &self.test)?)
    }

    /// Every client's submission for the next round, in client order.
    pub fn client_updates(&self) -> Result<Vec<UpdateVector>, HarnessError> {
        let round = (self.round + 1) as u64;
        let master = self.config.master_seed;
        let cfg = self.config.train;
        let d = self.layout.param_count();
        (0..self.config.n_clients)
            .into_par_iter()
            .map(|i| {
                let client = i as u64;
                let byzantine = self.byzantine[i];
                if byzantine && self.attack.kind == AttackKind::LargeOutlier {
                    let mut rng = stream(master, Purpose::Attack, client, round);
                    return Ok(attacks::forge_outlier_update(d, &self.attack, &mut rng));
                }
                let mut rng = stream(master, Purpose::LocalTraining, client, round);
                let update = training::local_train(&self.global, &self.shards[i], &cfg, &mut rng)?;
                if byzantine && self.attack.kind == AttackKind::NoiseInjection {
                    let mut rng = stream(master, Purpose::Attack, client, round);
                    return Ok(attacks::inject_noise(&update, &self.attack, &mut rng));
                }
                Ok(update)
            })
            .collect()
    }

    /// Runs one round: local training and attacks, aggregation, global
    /// update, evaluation.
    pub fn step(&mut self) -> Result<RoundOutcome, HarnessError> {
        let started = Instant::now();
        let updates = self.client_updates()?;
        let round = self.round + 1;
        let aggregation = match UpdateSet::new(updates) {
            Ok(set) => Some(self.aggregator.aggregate(&set)?),
            Err(AggregationError::NonFinite { client, coordinate }) => {
                warn!("round {round}: client {client} sent a non-finite value at {coordinate}; round skipped");
                self.rejected.push(round);
                None
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(result) = &aggregation {
            self.global = ModelParams::unflatten(&result.aggregate, &self.layout)?;
        }
        let eval = self.evaluate()?;
        self.round = round;
        let wall_time = if self.config.record_wall_time {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let metrics = RoundMetrics {
            round,
            test_accuracy: eval.accuracy,
            test_loss: eval.loss,
            selected_index: aggregation.as_ref().and_then(|r| r.selected_index),
            averaged_count: aggregation.as_ref().map_or(0, |r| r.averaged_indices.len()),
            f_hat_of_winner: aggregation.as_ref().and_then(|r| r.winner_f_hat()),
            wall_time,
        };
        debug!(
            "round {round}: accuracy {:.4} loss {:.4} selected {:?} averaged {} f_hat {:?}",
            metrics.test_accuracy,
            metrics.test_loss,
            metrics.selected_index,
            metrics.averaged_count,
            metrics.f_hat_of_winner
        );
        Ok(RoundOutcome {
            metrics,
            aggregation,
        })
    }

    /// Steps through the remaining rounds and assembles the run record.
    pub fn run(mut self) -> Result<RunRecord, HarnessError> {
        let initial = self.evaluate()?;
        let mut metrics = Vec::with_capacity(self.config.rounds);
        while self.round < self.config.rounds {
            metrics.push(self.step()?.metrics);
        }
        let accuracies: Vec<f64> = metrics.iter().map(|m| m.test_accuracy).collect();
        let summary = RunSummary {
            initial,
            final_mean_accuracy: tail_mean(&accuracies, 10),
            max_accuracy: accuracies.iter().copied().reduce(f64::max),
            rejected_rounds: self.rejected,
        };
        if let Some(acc) = summary.final_mean_accuracy {
            info!(
                "{}: final-10 mean accuracy {:.4}",
                self.aggregator.name(),
                acc
            );
        }
        Ok(RunRecord {
            config: self.config,
            metrics,
            summary,
        })
    }
}

/// Validates `config`, then runs every round.
pub fn run_experiment(config: ExperimentConfig) -> Result<RunRecord, HarnessError> {
    Simulation::new(config)?.run()
}
