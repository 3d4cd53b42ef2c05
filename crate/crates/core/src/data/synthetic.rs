use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Dataset;
use crate::error::DataError;

/// Gaussian classes with unit covariance around well-separated means.
///
/// With `classes <= dim`, class `c` is centred on `(separation / sqrt 2) * e_c`,
/// so every pair of means is exactly `separation` apart. With more classes
/// than axes, both directions of each axis are used (`±e_{c/2}`), which keeps
/// every pair at least `separation` apart; this needs `classes <= 2 * dim`.
/// Rows are grouped by class.
pub fn generate_synthetic<R: Rng + ?Sized>(
    classes: usize,
    dim: usize,
    per_class: usize,
    separation: f64,
    rng: &mut R,
) -> Result<Dataset, DataError> {
    if classes == 0 || dim == 0 || per_class == 0 {
        return Err(DataError::InvalidArgument(
            "classes, dim and per_class must be at least 1".into(),
        ));
    }
    if classes > 2 * dim {
        return Err(DataError::InvalidArgument(format!(
            "{classes} classes cannot be placed on the axes of a {dim}-dimensional space"
        )));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(DataError::InvalidArgument(format!(
            "bad separation {separation}"
        )));
    }
    let offset = separation / std::f64::consts::SQRT_2;
    let mut features = Vec::with_capacity(classes * per_class * dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    for c in 0..classes {
        let (axis, sign) = if classes <= dim {
            (c, 1.0)
        } else {
            (c / 2, if c % 2 == 0 { 1.0 } else { -1.0 })
        };
        for _ in 0..per_class {
            for k in 0..dim {
                let noise: f64 = StandardNormal.sample(rng);
                let mean = if k == axis { sign * offset } else { 0.0 };
                features.push(mean + noise);
            }
            labels.push(c);
        }
    }
    Dataset::new(features, labels, dim, classes)
}
