//! Per-class Dirichlet partitioning of a training set across clients.
//!
//! For every class, client proportions are drawn from a symmetric
//! Dirichlet(alpha) and that class's (shuffled) samples are dealt out in
//! contiguous runs sized by largest-remainder rounding. Large `alpha` gives
//! near-identical class mixes per client; small `alpha` concentrates each
//! class on a few clients.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::DataError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub n_clients: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// Row indices owned by one client, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientShard {
    pub indices: Vec<usize>,
}

impl ClientShard {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn dirichlet<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha validated positive");
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        draws.into_iter().map(|g| g / total).collect()
    } else {
        // every gamma draw underflowed (tiny alpha); fall back to uniform
        vec![1.0 / k as f64; k]
    }
}

/// Integer counts summing to `total`, proportional to `weights`. Leftover
/// units go to the largest fractional parts, lowest index first on ties.
pub(crate) fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

pub fn dirichlet_partition(
    dataset: &Dataset,
    spec: &PartitionSpec,
) -> Result<Vec<ClientShard>, DataError> {
    let n = spec.n_clients;
    if n == 0 {
        return Err(DataError::InvalidArgument(
            "n_clients must be at least 1".into(),
        ));
    }
    if !(spec.alpha > 0.0 && spec.alpha.is_finite()) {
        return Err(DataError::InvalidArgument(format!(
            "Dirichlet alpha must be positive, got {}",
            spec.alpha
        )));
    }
    if n > dataset.len() {
        return Err(DataError::TooManyClients {
            samples: dataset.len(),
            clients: n,
        });
    }

    let mut rng = rng::stream_from_seed(spec.seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.classes()];
    for (i, &label) in dataset.labels().iter().enumerate() {
        by_class[label].push(i);
    }

    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); n];
    for mut members in by_class {
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let proportions = dirichlet(spec.alpha, n, &mut rng);
        let counts = largest_remainder(&proportions, members.len());
        let mut start = 0;
        for (shard, count) in shards.iter_mut().zip(counts) {
            shard.extend_from_slice(&members[start..start + count]);
            start += count;
        }
    }

    for empty in 0..n {
        if !shards[empty].is_empty() {
            continue;
        }
        let donor = (0..n)
            .max_by(|&a, &b| shards[a].len().cmp(&shards[b].len()).then(b.cmp(&a)))
            .expect("n >= 1");
        let moved = shards[donor].pop().expect("donor holds at least two rows");
        shards[empty].push(moved);
    }

    Ok(shards
        .into_iter()
        .map(|mut indices| {
            indices.sort_unstable();
            ClientShard { indices }
        })
        .collect())
}
