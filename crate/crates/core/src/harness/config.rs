//! Experiment configuration in TOML.
//!
//! Every optional key is filled in by [`parse_config`] so that the
//! serialized config is a complete, re-runnable snapshot.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregation::Aggregator;
use crate::attacks::{AttackKind, AttackSpec, LabelMap};
use crate::error::ConfigError;
use crate::rng::{derive_seed, Purpose};
use crate::training::{TrainConfig, DEFAULT_LEAKY_SLOPE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Gaussian classes with well-separated means.
    Synthetic {
        #[serde(default = "default_classes")]
        classes: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_per_class")]
        per_class: usize,
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
    },
    /// MNIST-style IDX files with a fixed train/test split.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
    /// Feature CSV, split by seeded shuffle.
    Csv {
        path: PathBuf,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
    },
}

fn default_classes() -> usize {
    2
}
fn default_dim() -> usize {
    20
}
fn default_per_class() -> usize {
    1000
}
fn default_separation() -> f64 {
    5.0
}
fn default_test_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorKind {
    Mean,
    Krum,
    Mkrum,
    Rkrum,
    Arkrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub kind: AttackKind,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    /// `[[from, to], ...]`; defaults to the binary swap for two classes and
    /// the 0-9, 1-8, ... pairing for ten.
    pub label_map: Option<Vec<(usize, usize)>>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            kind: AttackKind::None,
            mu: None,
            sigma: None,
            label_map: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub seed: Option<u64>,
}

fn default_alpha() -> f64 {
    10.0
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Full layer list including input and output widths. Defaults to
    /// `[dim, 32, 16, 8, classes]` once the dataset is known.
    pub layer_sizes: Option<Vec<usize>>,
    #[serde(default = "default_slope")]
    pub leaky_slope: f64,
}

fn default_slope() -> f64 {
    DEFAULT_LEAKY_SLOPE
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            layer_sizes: None,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub aggregator: AggregatorKind,
    /// Byzantine count assumed by `krum` and `mkrum`.
    pub known_f: Option<usize>,
    #[serde(default = "default_n_clients")]
    pub n_clients: usize,
    #[serde(default = "default_byzantine_count")]
    pub byzantine_count: usize,
    /// Defaults to the last `byzantine_count` clients.
    pub byzantine_indices: Option<Vec<usize>>,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// When false, `wall_time_s` is written as 0 so metrics are byte-stable.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    pub output: Option<PathBuf>,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub model: ModelConfig,
}

fn default_n_clients() -> usize {
    100
}
fn default_byzantine_count() -> usize {
    48
}
fn default_rounds() -> usize {
    200
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// The configured rule as an [`Aggregator`].
    pub fn aggregator(&self) -> Aggregator {
        let f = self.known_f.unwrap_or(0);
        match self.aggregator {
            AggregatorKind::Mean => Aggregator::Mean,
            AggregatorKind::Krum => Aggregator::Krum { f },
            AggregatorKind::Mkrum => Aggregator::MultiKrum { f },
            AggregatorKind::Rkrum => Aggregator::RKrum,
            AggregatorKind::Arkrum => Aggregator::ArKrum,
        }
    }

    /// Byzantine client indices, ascending.
    pub fn byzantine_clients(&self) -> Vec<usize> {
        match &self.byzantine_indices {
            Some(list) => {
                let mut list = list.clone();
                list.sort_unstable();
                list
            }
            None => (self.n_clients - self.byzantine_count..self.n_clients).collect(),
        }
    }

    pub fn attack_spec(&self) -> AttackSpec {
        let (mu, sigma) = self.attack.kind.default_gaussian();
        AttackSpec {
            kind: self.attack.kind,
            mu: self.attack.mu.unwrap_or(mu),
            sigma: self.attack.sigma.unwrap_or(sigma),
            label_map: LabelMap::new(self.attack.label_map.clone().unwrap_or_default()),
        }
    }

    pub fn partition_seed(&self) -> u64 {
        self.partition
            .seed
            .unwrap_or_else(|| derive_seed(self.master_seed, Purpose::Partition, 0, 0))
    }

    /// Checks constraints and fills every default that does not depend on
    /// the dataset contents.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        self.validate()?;
        let (mu, sigma) = self.attack.kind.default_gaussian();
        if matches!(
            self.attack.kind,
            AttackKind::LargeOutlier | AttackKind::NoiseInjection
        ) {
            self.attack.mu.get_or_insert(mu);
            self.attack.sigma.get_or_insert(sigma);
        }
        if self.byzantine_indices.is_none() {
            self.byzantine_indices = Some(self.byzantine_clients());
        }
        if self.partition.seed.is_none() {
            self.partition.seed = Some(self.partition_seed());
        }
        Ok(self)
    }

    /// Fills the defaults that need the class count and feature dimension.
    pub fn resolve_for_data(&mut self, dim: usize, classes: usize) {
        if self.model.layer_sizes.is_none() {
            self.model.layer_sizes = Some(vec![dim, 32, 16, 8, classes]);
        }
        if self.attack.kind == AttackKind::LabelFlipping && self.attack.label_map.is_none() {
            let map = match classes {
                2 => LabelMap::binary(),
                _ => LabelMap::mnist(),
            };
            self.attack.label_map = Some(map.pairs().collect());
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key, message: String| Err(ConfigError::Invalid { key, message });
        if self.n_clients == 0 {
            return invalid("n_clients", "must be at least 1".into());
        }
        if self.byzantine_count >= self.n_clients {
            return invalid(
                "byzantine_count",
                format!(
                    "must be below n_clients: byzantine_count = {}, n_clients = {}",
                    self.byzantine_count, self.n_clients
                ),
            );
        }
        if let Some(list) = &self.byzantine_indices {
            if list.len() != self.byzantine_count {
                return invalid(
                    "byzantine_indices",
                    format!(
                        "has {} entries, byzantine_count is {}",
                        list.len(),
                        self.byzantine_count
                    ),
                );
            }
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != list.len() {
                return invalid("byzantine_indices", "contains duplicates".into());
            }
            if let Some(&bad) = sorted.iter().find(|&&i| i >= self.n_clients) {
                return invalid(
                    "byzantine_indices",
                    format!("index {bad} is out of range for {} clients", self.n_clients),
                );
            }
        }
        match self.aggregator {
            AggregatorKind::Krum | AggregatorKind::Mkrum => {
                let known_f = self.known_f.ok_or(ConfigError::Missing("known_f"))?;
                if 2 + 2 * known_f >= self.n_clients {
                    return Err(ConfigError::KrumConstraint {
                        known_f,
                        n_clients: self.n_clients,
                    });
                }
            }
            AggregatorKind::Rkrum | AggregatorKind::Arkrum if self.n_clients < 4 => {
                return invalid(
                    "n_clients",
                    "rkrum and arkrum need at least 4 clients".into(),
                );
            }
            _ => {}
        }
        if let Some(sigma) = self.attack.sigma {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return invalid(
                    "attack.sigma",
                    format!("must be finite and nonnegative, got {sigma}"),
                );
            }
        }
        if let Some(mu) = self.attack.mu {
            if !mu.is_finite() {
                return invalid("attack.mu", format!("must be finite, got {mu}"));
            }
        }
        if !(self.partition.alpha.is_finite() && self.partition.alpha > 0.0) {
            return invalid(
                "partition.alpha",
                format!("must be positive, got {}", self.partition.alpha),
            );
        }
        if self.train.local_epochs == 0 {
            return invalid("train.local_epochs", "must be at least 1".into());
        }
        if self.train.batch_size == 0 {
            return invalid("train.batch_size", "must be at least 1".into());
        }
        if !(self.train.learning_rate.is_finite() && self.train.learning_rate >= 0.0) {
            return invalid(
                "train.learning_rate",
                format!(
                    "must be finite and nonnegative, got {}",
                    self.train.learning_rate
                ),
            );
        }
        if !self.model.leaky_slope.is_finite() {
            return invalid("model.leaky_slope", "must be finite".into());
        }
        match &self.dataset {
            DatasetSource::Synthetic { test_fraction, .. }
            | DatasetSource::Csv { test_fraction, .. }
                if !(*test_fraction > 0.0 && *test_fraction < 1.0) =>
            {
                invalid(
                    "dataset.test_fraction",
                    format!("must lie in (0, 1), got {test_fraction}"),
                )
            }
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }
}

/// Parses and resolves a config from TOML text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    raw.resolve()
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        aggregator = "arkrum"
        [dataset]
        kind = "synthetic"
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.n_clients, 100);
        assert_eq!(cfg.byzantine_count, 48);
        assert_eq!(cfg.rounds, 200);
        assert_eq!(cfg.train, TrainConfig::default());
        assert_eq!(cfg.train.local_epochs, 5);
        assert_eq!(cfg.model.leaky_slope, 0.2);
        assert_eq!(cfg.byzantine_clients(), (52..100).collect::<Vec<_>>());
        assert!(cfg.partition.seed.is_some());
        let snapshot = cfg.to_toml();
        assert!(snapshot.contains("rounds = 200"), "{snapshot}");
        assert!(snapshot.contains("local_epochs = 5"), "{snapshot}");
        assert_eq!(parse_config_str(&snapshot).unwrap(), cfg);
    }

    #[test]
    fn attack_sigma_defaults_by_kind() {
        let outlier =
            parse_config_str(&format!("{MINIMAL}\n[attack]\nkind = \"large_outlier\"")).unwrap();
        assert_eq!(
            (outlier.attack.mu, outlier.attack.sigma),
            (Some(0.0), Some(10.0))
        );
        let noise =
            parse_config_str(&format!("{MINIMAL}\n[attack]\nkind = \"noise_injection\"")).unwrap();
        assert_eq!(noise.attack_spec().sigma, 1.0);
        let custom = parse_config_str(&format!(
            "{MINIMAL}\n[attack]\nkind = \"large_outlier\"\nsigma = 3.5"
        ))
        .unwrap();
        assert_eq!(custom.attack_spec().sigma, 3.5);
    }

    #[test]
    fn label_map_defaults_by_class_count() {
        let mut cfg =
            parse_config_str(&format!("{MINIMAL}\n[attack]\nkind = \"label_flipping\"")).unwrap();
        let mut ten = cfg.clone();
        cfg.resolve_for_data(20, 2);
        assert_eq!(cfg.attack.label_map, Some(vec![(0, 1), (1, 0)]));
        assert_eq!(cfg.model.layer_sizes, Some(vec![20, 32, 16, 8, 2]));
        ten.resolve_for_data(784, 10);
        assert_eq!(ten.attack_spec().label_map, LabelMap::mnist());
        let snapshot = ten.to_toml();
        assert_eq!(parse_config_str(&snapshot).unwrap(), ten);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_config_str(&format!("{MINIMAL}\nrondus = 3")).unwrap_err();
        assert!(err.to_string().contains("rondus"), "{err}");
        let err = parse_config_str(&format!("{MINIMAL}\n[train]\nepochs = 3")).unwrap_err();
        assert!(err.to_string().contains("epochs"), "{err}");
    }

    #[test]
    fn missing_required_keys() {
        let err = parse_config_str("aggregator = \"mean\"").unwrap_err();
        assert!(err.to_string().contains("dataset"), "{err}");
        let err = parse_config_str("[dataset]\nkind = \"synthetic\"").unwrap_err();
        assert!(err.to_string().contains("aggregator"), "{err}");
    }

    #[test]
    fn krum_requires_known_f() {
        let text = MINIMAL.replace("arkrum", "krum");
        let err = parse_config_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Missing("known_f")));
        assert!(err.to_string().contains("known_f"));
    }

    #[test]
    fn krum_constraint() {
        let ok = parse_config_str(&format!(
            "known_f = 48\n{}",
            MINIMAL.replace("arkrum", "krum")
        ))
        .unwrap();
        assert_eq!(ok.aggregator(), Aggregator::Krum { f: 48 });

        let text = format!("known_f = 49\n{}", MINIMAL.replace("arkrum", "mkrum"));
        let err = parse_config_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("49") && msg.contains("100"), "{msg}");
    }

    #[test]
    fn byzantine_index_checks() {
        let base = format!("n_clients = 5\nbyzantine_count = 2\n{MINIMAL}");
        let ok = parse_config_str(&format!("byzantine_indices = [3, 0]\n{base}")).unwrap();
        assert_eq!(ok.byzantine_clients(), vec![0, 3]);
        for bad in ["[0]", "[1, 1]", "[0, 5]"] {
            let err = parse_config_str(&format!("byzantine_indices = {bad}\n{base}")).unwrap_err();
            assert!(err.to_string().contains("byzantine_indices"), "{err}");
        }
        let err = parse_config_str(&format!("n_clients = 5\nbyzantine_count = 5\n{MINIMAL}"))
            .unwrap_err();
        assert!(err.to_string().contains("byzantine_count"), "{err}");
    }

    #[test]
    fn numeric_ranges() {
        for (section, line, key) in [
            ("train", "batch_size = 0", "train.batch_size"),
            ("train", "local_epochs = 0", "train.local_epochs"),
            ("partition", "alpha = 0.0", "partition.alpha"),
            (
                "attack",
                "kind = \"large_outlier\"\nsigma = -1.0",
                "attack.sigma",
            ),
        ] {
            let err = parse_config_str(&format!("{MINIMAL}\n[{section}]\n{line}")).unwrap_err();
            assert!(err.to_string().contains(key), "{err}");
        }
    }
}
