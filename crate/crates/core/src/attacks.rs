//! Byzantine client behaviour.
//!
//! Two attacks act on the outgoing update (replacement by a large Gaussian
//! vector, or additive Gaussian noise on an honestly trained update); label
//! flipping acts on the client's training data before local training.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::aggregation::UpdateVector;
use crate::data::Dataset;
use crate::error::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    LargeOutlier,
    NoiseInjection,
    LabelFlipping,
}

impl AttackKind {
    /// Default `(mu, sigma)` for the Gaussian attacks.
    pub fn default_gaussian(self) -> (f64, f64) {
        match self {
            AttackKind::LargeOutlier => (0.0, 10.0),
            AttackKind::NoiseInjection => (0.0, 1.0),
            AttackKind::None | AttackKind::LabelFlipping => (0.0, 0.0),
        }
    }
}

/// Source label to target label. Applied simultaneously, never chained.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMap(BTreeMap<usize, usize>);

impl LabelMap {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self(pairs.into_iter().collect())
    }

    /// 0->9, 1->8, 2->7, 3->6, 4->5; labels 5..9 are left alone.
    pub fn mnist() -> Self {
        Self::new((0..5).map(|l| (l, 9 - l)))
    }

    /// 0->1, 1->0.
    pub fn binary() -> Self {
        Self::new([(0, 1), (1, 0)])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, label: usize) -> usize {
        self.0.get(&label).copied().unwrap_or(label)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    /// Rejects sources or images outside `0..classes`, and maps that send
    /// two sources to the same image.
    pub fn validate(&self, classes: usize) -> Result<(), DataError> {
        let mut seen = std::collections::BTreeSet::new();
        for (from, to) in self.pairs() {
            for label in [from, to] {
                if label >= classes {
                    return Err(DataError::LabelOutOfRange { label, classes });
                }
            }
            if !seen.insert(to) {
                return Err(DataError::InvalidArgument(format!(
                    "label map sends two labels to {to}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub mu: f64,
    pub sigma: f64,
    #[serde(default)]
    pub label_map: LabelMap,
}

impl AttackSpec {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            mu: 0.0,
            sigma: 0.0,
            label_map: LabelMap::default(),
        }
    }

    pub fn large_outlier() -> Self {
        let (mu, sigma) = AttackKind::LargeOutlier.default_gaussian();
        Self {
            kind: AttackKind::LargeOutlier,
            mu,
            sigma,
            label_map: LabelMap::default(),
        }
    }

    pub fn noise_injection() -> Self {
        let (mu, sigma) = AttackKind::NoiseInjection.default_gaussian();
        Self {
            kind: AttackKind::NoiseInjection,
            mu,
            sigma,
            label_map: LabelMap::default(),
        }
    }

    pub fn label_flipping(label_map: LabelMap) -> Self {
        Self {
            kind: AttackKind::LabelFlipping,
            mu: 0.0,
            sigma: 0.0,
            label_map,
        }
    }

    fn normal(&self) -> Normal<f64> {
        Normal::new(self.mu, self.sigma).expect("sigma must be finite and nonnegative")
    }
}

/// A `d`-dimensional vector of independent `Normal(mu, sigma^2)` draws. The
/// client's honest update is never consulted.
pub fn forge_outlier_update<R: Rng + ?Sized>(
    d: usize,
    spec: &AttackSpec,
    rng: &mut R,
) -> UpdateVector {
    let normal = spec.normal();
    UpdateVector::new((0..d).map(|_| normal.sample(rng)).collect())
}

/// `update + eps` with `eps_k ~ Normal(mu, sigma^2)` independently.
pub fn inject_noise<R: Rng + ?Sized>(
    update: &UpdateVector,
    spec: &AttackSpec,
    rng: &mut R,
) -> UpdateVector {
    let normal = spec.normal();
    UpdateVector::new(
        update
            .as_slice()
            .iter()
            .map(|&v| v + normal.sample(rng))
            .collect(),
    )
}

/// Copy of `dataset` with every label in the map's domain replaced by its
/// image. Features are untouched.
pub fn flip_labels(dataset: &Dataset, map: &LabelMap) -> Result<Dataset, DataError> {
    map.validate(dataset.classes())?;
    Ok(dataset.with_labels(dataset.labels().iter().map(|&l| map.get(l)).collect()))
}
