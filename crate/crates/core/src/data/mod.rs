//! Datasets, loaders, and client partitioning.

mod feature_csv;
mod idx;
mod partition;
mod synthetic;

pub use feature_csv::load_feature_csv;
pub use idx::{load_idx, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use partition::{dirichlet_partition, ClientShard, PartitionSpec};
pub use synthetic::generate_synthetic;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::DataError;

/// Row-major feature matrix with integer class labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        dim: usize,
        classes: usize,
    ) -> Result<Self, DataError> {
        if labels.is_empty() {
            return Err(DataError::InvalidArgument("dataset has no rows".into()));
        }
        if dim == 0 || features.len() != labels.len() * dim {
            return Err(DataError::InvalidArgument(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::InvalidArgument(format!(
                "non-finite feature in row {}",
                pos / dim
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(DataError::LabelOutOfRange { label, classes });
        }
        Ok(Self {
            features,
            labels,
            dim,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Copy of the rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
            classes: self.classes,
        }
    }

    /// Same features with replaced labels; used by label flipping.
    pub(crate) fn with_labels(&self, labels: Vec<usize>) -> Dataset {
        debug_assert_eq!(labels.len(), self.labels.len());
        Dataset {
            features: self.features.clone(),
            labels,
            dim: self.dim,
            classes: self.classes,
        }
    }

    /// Per-class sample counts.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Seeded shuffle, then the first `round(train_fraction * N)` rows go to
    /// training. Both sides keep at least one row when `N >= 2`.
    pub fn train_test_split<R: Rng + ?Sized>(
        &self,
        train_fraction: f64,
        rng: &mut R,
    ) -> Result<(Dataset, Dataset), DataError> {
        if self.len() < 2 || !(0.0..1.0).contains(&train_fraction) || train_fraction == 0.0 {
            return Err(DataError::InvalidArgument(format!(
                "cannot split {} rows with train fraction {train_fraction}",
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(rng);
        let cut = ((train_fraction * self.len() as f64).round() as usize).clamp(1, self.len() - 1);
        Ok((self.subset(&order[..cut]), self.subset(&order[cut..])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::new(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], vec![0, 1, 1], 2, 2).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(Dataset::new(vec![], vec![], 2, 2).is_err());
        assert!(Dataset::new(vec![0.0; 3], vec![0, 0], 2, 2).is_err());
        assert!(matches!(
            Dataset::new(vec![0.0; 2], vec![2], 2, 2),
            Err(DataError::LabelOutOfRange {
                label: 2,
                classes: 2
            })
        ));
        assert!(Dataset::new(vec![f64::NAN, 0.0], vec![0], 2, 2).is_err());
    }

    #[test]
    fn subset_and_histogram() {
        let d = tiny();
        let s = d.subset(&[2, 0]);
        assert_eq!(s.row(0), &[4.0, 5.0]);
        assert_eq!(s.labels(), &[1, 0]);
        assert_eq!(d.class_histogram(), vec![1, 2]);
    }

    #[test]
    fn split_is_seeded_and_complete() {
        let data = Dataset::new((0..20).map(f64::from).collect(), vec![0; 10], 2, 1).unwrap();
        let (a, b) = data
            .train_test_split(0.8, &mut crate::rng::stream_from_seed(3))
            .unwrap();
        assert_eq!((a.len(), b.len()), (8, 2));
        let (a2, _) = data
            .train_test_split(0.8, &mut crate::rng::stream_from_seed(3))
            .unwrap();
        assert_eq!(a, a2);
        let mut firsts: Vec<f64> = a
            .features()
            .chunks(2)
            .chain(b.features().chunks(2))
            .map(|r| r[0])
            .collect();
        firsts.sort_by(f64::total_cmp);
        assert_eq!(
            firsts,
            (0..10).map(|i| f64::from(2 * i)).collect::<Vec<_>>()
        );
    }
}
