//! Krum-family aggregation rules.
//!
//! Every rule consumes an [`UpdateSet`] (one flattened update per client, in
//! client-index order) and produces an [`AggregationResult`]. The selection
//! rules share one pipeline:
//!
//! 1. squared Euclidean distances between every pair of updates,
//! 2. a per-client score: the sum of the `n - f - 2` smallest distances to
//!    other clients (with `f` either given or estimated per client),
//! 3. the lowest-scoring client wins (lowest index on ties),
//! 4. Krum/rKrum return the winner verbatim; Multi-Krum/ArKrum average the
//!    `n - f` updates nearest to the winner, the winner included.
//!
//! Client indices are 0-based throughout.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::changepoint::{self, ByzantineEstimate};
use crate::error::AggregationError;

/// One client's flattened model update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UpdateVector(Vec<f64>);

impl UpdateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|v| !v.is_finite())
    }
}

impl From<Vec<f64>> for UpdateVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// The updates received in one round, validated: nonempty, equal nonzero
/// dimension, every value finite.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateSet {
    updates: Vec<UpdateVector>,
    dim: usize,
}

impl UpdateSet {
    pub fn new(updates: Vec<UpdateVector>) -> Result<Self, AggregationError> {
        let first = updates.first().ok_or(AggregationError::Empty)?;
        let dim = first.len();
        if dim == 0 {
            return Err(AggregationError::ZeroDimension);
        }
        for (client, update) in updates.iter().enumerate() {
            if update.len() != dim {
                return Err(AggregationError::DimensionMismatch {
                    client,
                    expected: dim,
                    found: update.len(),
                });
            }
            if let Some(coordinate) = update.first_non_finite() {
                return Err(AggregationError::NonFinite { client, coordinate });
            }
        }
        Ok(Self { updates, dim })
    }

    pub fn from_rows<I, R>(rows: I) -> Result<Self, AggregationError>
    where
        I: IntoIterator<Item = R>,
        R: Into<Vec<f64>>,
    {
        Self::new(rows.into_iter().map(|r| UpdateVector(r.into())).collect())
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, client: usize) -> &UpdateVector {
        &self.updates[client]
    }

    pub fn updates(&self) -> &[UpdateVector] {
        &self.updates
    }

    /// Same updates in a new client order: position `k` of the result holds
    /// the update of client `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            updates: order.iter().map(|&i| self.updates[i].clone()).collect(),
            dim: self.dim,
        }
    }
}

/// Symmetric `n x n` matrix of squared distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc
}

/// `d[i][j] = sum_k (u_ik - u_jk)^2`. Each pair is computed once and mirrored.
pub fn pairwise_sq_distances(updates: &UpdateSet) -> DistanceMatrix {
    let n = updates.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = squared_distance(updates.get(i).as_slice(), updates.get(j).as_slice());
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix { n, entries }
}

/// Other clients ordered by distance from `i`, nearest first. Stable, so
/// equal distances keep ascending client order.
pub fn nearest_neighbors(matrix: &DistanceMatrix, i: usize) -> Vec<(usize, f64)> {
    let mut others: Vec<(usize, f64)> = matrix
        .row(i)
        .iter()
        .copied()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .collect();
    others.sort_by(|a, b| a.1.total_cmp(&b.1));
    others
}

/// The `n - 1` off-diagonal distances of row `i`, ascending.
pub fn sorted_row(matrix: &DistanceMatrix, i: usize) -> Result<Vec<f64>, AggregationError> {
    if i >= matrix.n() {
        return Err(AggregationError::IndexOutOfRange {
            index: i,
            n: matrix.n(),
        });
    }
    Ok(nearest_neighbors(matrix, i)
        .into_iter()
        .map(|(_, d)| d)
        .collect())
}

/// A Krum score and the window it was summed over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrumScore {
    pub score: f64,
    pub neighbor_count: usize,
    /// `n - f - 2` was below one and the window was widened to one.
    pub clamped: bool,
}

/// Sum of the first `max(1, n - f - 2)` entries of a sorted row.
pub fn krum_score(row: &[f64], f: usize, n: usize) -> KrumScore {
    let wanted = n as isize - f as isize - 2;
    let clamped = wanted < 1;
    let neighbor_count = (wanted.max(1) as usize).min(row.len());
    let mut score = 0.0;
    for &d in &row[..neighbor_count] {
        score += d;
    }
    KrumScore {
        score,
        neighbor_count,
        clamped,
    }
}

/// A client's score together with the neighbors that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredClient {
    pub index: usize,
    pub score: f64,
    pub neighbor_indices: Vec<usize>,
    pub clamped: bool,
}

fn score_client(matrix: &DistanceMatrix, i: usize, f: usize) -> ScoredClient {
    let neighbors = nearest_neighbors(matrix, i);
    let row: Vec<f64> = neighbors.iter().map(|&(_, d)| d).collect();
    let score = krum_score(&row, f, matrix.n());
    ScoredClient {
        index: i,
        score: score.score,
        neighbor_indices: neighbors[..score.neighbor_count]
            .iter()
            .map(|&(j, _)| j)
            .collect(),
        clamped: score.clamped,
    }
}

/// Known-`f` Krum scores for every client.
pub fn krum_scores(updates: &UpdateSet, f: usize) -> Vec<ScoredClient> {
    let matrix = pairwise_sq_distances(updates);
    (0..updates.len())
        .map(|i| score_client(&matrix, i, f))
        .collect()
}

fn argmin_lowest_index(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = i;
        }
    }
    best
}

fn mean_of(updates: &UpdateSet, indices: &[usize]) -> UpdateVector {
    let mut acc = vec![0.0; updates.dim()];
    for &i in indices {
        for (a, v) in acc.iter_mut().zip(updates.get(i).as_slice()) {
            *a += v;
        }
    }
    let count = indices.len() as f64;
    for a in &mut acc {
        *a /= count;
    }
    UpdateVector(acc)
}

/// Coordinate-wise mean of the `m` updates nearest to `center`, the center
/// itself included.
pub fn neighbor_average(
    updates: &UpdateSet,
    matrix: &DistanceMatrix,
    center: usize,
    m: usize,
) -> Result<UpdateVector, AggregationError> {
    Ok(mean_of(updates, &nearest_set(updates, matrix, center, m)?))
}

fn nearest_set(
    updates: &UpdateSet,
    matrix: &DistanceMatrix,
    center: usize,
    m: usize,
) -> Result<Vec<usize>, AggregationError> {
    let n = updates.len();
    if center >= n {
        return Err(AggregationError::IndexOutOfRange { index: center, n });
    }
    if m == 0 || m > n {
        return Err(AggregationError::NeighborCountOutOfRange { m, n });
    }
    let mut chosen = Vec::with_capacity(m);
    chosen.push(center);
    chosen.extend(
        nearest_neighbors(matrix, center)
            .into_iter()
            .take(m - 1)
            .map(|(j, _)| j),
    );
    Ok(chosen)
}

/// What an aggregation rule returned and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationResult {
    pub aggregate: UpdateVector,
    pub selected_index: Option<usize>,
    /// Clients whose updates were averaged into `aggregate`, nearest-first
    /// for the neighbor-averaging rules.
    pub averaged_indices: Vec<usize>,
    /// Per-client estimates for the estimating rules.
    pub estimates: Option<Vec<ByzantineEstimate>>,
    /// Clients whose score window was widened to one neighbor.
    pub clamped_clients: Vec<usize>,
}

impl AggregationResult {
    /// Estimated Byzantine count of the winning client, if estimated.
    pub fn winner_f_hat(&self) -> Option<usize> {
        let winner = self.selected_index?;
        self.estimates.as_ref().map(|e| e[winner].f_hat)
    }
}

/// Coordinate-wise average of all updates.
pub fn aggregate_mean(updates: &UpdateSet) -> AggregationResult {
    let all: Vec<usize> = (0..updates.len()).collect();
    AggregationResult {
        aggregate: mean_of(updates, &all),
        selected_index: None,
        averaged_indices: all,
        estimates: None,
        clamped_clients: Vec::new(),
    }
}

fn check_krum_constraint(n: usize, f: usize) -> Result<(), AggregationError> {
    if 2 + 2 * f < n {
        Ok(())
    } else {
        Err(AggregationError::ConstraintViolation { f, n })
    }
}

struct Selection {
    matrix: DistanceMatrix,
    winner: usize,
}

fn select_known_f(updates: &UpdateSet, f: usize) -> Result<Selection, AggregationError> {
    check_krum_constraint(updates.len(), f)?;
    let matrix = pairwise_sq_distances(updates);
    let scores: Vec<f64> = (0..updates.len())
        .map(|i| score_client(&matrix, i, f).score)
        .collect();
    let winner = argmin_lowest_index(&scores);
    Ok(Selection { matrix, winner })
}

/// Krum with a known Byzantine count: the lowest-scoring update, verbatim.
pub fn aggregate_krum(
    updates: &UpdateSet,
    f: usize,
) -> Result<AggregationResult, AggregationError> {
    let Selection { winner, .. } = select_known_f(updates, f)?;
    Ok(AggregationResult {
        aggregate: updates.get(winner).clone(),
        selected_index: Some(winner),
        averaged_indices: vec![winner],
        estimates: None,
        clamped_clients: Vec::new(),
    })
}

/// Multi-Krum: the Krum winner plus its `n - f - 1` nearest peers, averaged.
pub fn aggregate_mkrum(
    updates: &UpdateSet,
    f: usize,
) -> Result<AggregationResult, AggregationError> {
    let Selection { matrix, winner } = select_known_f(updates, f)?;
    let averaged = nearest_set(updates, &matrix, winner, updates.len() - f)?;
    Ok(AggregationResult {
        aggregate: mean_of(updates, &averaged),
        selected_index: Some(winner),
        averaged_indices: averaged,
        estimates: None,
        clamped_clients: Vec::new(),
    })
}

/// Knobs for the estimating rules. The defaults give ArKrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArKrumOptions {
    /// Apply median-threshold filtering before segmentation.
    pub filter: bool,
    /// Skip estimation and use this Byzantine count for every client.
    pub fixed_f: Option<usize>,
}

impl Default for ArKrumOptions {
    fn default() -> Self {
        Self {
            filter: true,
            fixed_f: None,
        }
    }
}

struct EstimatedSelection {
    matrix: DistanceMatrix,
    winner: usize,
    estimates: Vec<ByzantineEstimate>,
    clamped: Vec<usize>,
}

fn fixed_estimate(f: usize) -> ByzantineEstimate {
    ByzantineEstimate {
        f_hat: f,
        removed_by_filter: 0,
        sse_change_point: 0,
        left_sse: 0.0,
        right_sse: 0.0,
        degenerate: false,
    }
}

/// Scores every client with its own estimated `f_hat`. The per-client loop is
/// data-parallel; each score is a sequential sum over one row, so results do
/// not depend on thread scheduling.
fn select_estimated(
    updates: &UpdateSet,
    options: ArKrumOptions,
    rule: &'static str,
) -> Result<EstimatedSelection, AggregationError> {
    let n = updates.len();
    if n < 4 {
        return Err(AggregationError::TooFewClients {
            rule,
            required: 4,
            n,
        });
    }
    let matrix = pairwise_sq_distances(updates);
    let per_client: Vec<(ByzantineEstimate, KrumScore)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row: Vec<f64> = nearest_neighbors(&matrix, i)
                .into_iter()
                .map(|(_, d)| d)
                .collect();
            let estimate = match options.fixed_f {
                Some(f) => fixed_estimate(f),
                None => changepoint::estimate_f(&row, options.filter),
            };
            let score = krum_score(&row, estimate.f_hat, n);
            (estimate, score)
        })
        .collect();

    let scores: Vec<f64> = per_client.iter().map(|(_, s)| s.score).collect();
    let clamped = per_client
        .iter()
        .enumerate()
        .filter(|(_, (_, s))| s.clamped)
        .map(|(i, _)| i)
        .collect();
    Ok(EstimatedSelection {
        winner: argmin_lowest_index(&scores),
        estimates: per_client.into_iter().map(|(e, _)| e).collect(),
        matrix,
        clamped,
    })
}

/// rKrum: Krum with a per-client change-point estimate of `f` on the raw
/// sorted row (no filtering); returns the winner verbatim.
pub fn aggregate_rkrum(updates: &UpdateSet) -> Result<AggregationResult, AggregationError> {
    let sel = select_estimated(
        updates,
        ArKrumOptions {
            filter: false,
            fixed_f: None,
        },
        "rkrum",
    )?;
    if !sel.clamped.is_empty() {
        log::debug!("rkrum: score window clamped for clients {:?}", sel.clamped);
    }
    Ok(AggregationResult {
        aggregate: updates.get(sel.winner).clone(),
        selected_index: Some(sel.winner),
        averaged_indices: vec![sel.winner],
        estimates: Some(sel.estimates),
        clamped_clients: sel.clamped,
    })
}

/// ArKrum: filtered per-client estimate of `f`, Krum selection, then the
/// mean of the `max(1, n - f_hat)` updates nearest the winner, where
/// `f_hat` is the winner's own estimate.
pub fn aggregate_arkrum(updates: &UpdateSet) -> Result<AggregationResult, AggregationError> {
    aggregate_arkrum_with(updates, ArKrumOptions::default())
}

pub fn aggregate_arkrum_with(
    updates: &UpdateSet,
    options: ArKrumOptions,
) -> Result<AggregationResult, AggregationError> {
    let n = updates.len();
    let sel = select_estimated(updates, options, "arkrum")?;
    let f_hat = sel.estimates[sel.winner].f_hat;
    let keep = n.saturating_sub(f_hat).max(1);
    let averaged = nearest_set(updates, &sel.matrix, sel.winner, keep)?;
    if !sel.clamped.is_empty() {
        log::debug!("arkrum: score window clamped for clients {:?}", sel.clamped);
    }
    Ok(AggregationResult {
        aggregate: mean_of(updates, &averaged),
        selected_index: Some(sel.winner),
        averaged_indices: averaged,
        estimates: Some(sel.estimates),
        clamped_clients: sel.clamped,
    })
}

/// The five aggregation rules as one configurable value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Mean,
    Krum { f: usize },
    MultiKrum { f: usize },
    RKrum,
    ArKrum,
}

impl Aggregator {
    pub fn aggregate(&self, updates: &UpdateSet) -> Result<AggregationResult, AggregationError> {
        match *self {
            Aggregator::Mean => Ok(aggregate_mean(updates)),
            Aggregator::Krum { f } => aggregate_krum(updates, f),
            Aggregator::MultiKrum { f } => aggregate_mkrum(updates, f),
            Aggregator::RKrum => aggregate_rkrum(updates),
            Aggregator::ArKrum => aggregate_arkrum(updates),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::Krum { .. } => "krum",
            Aggregator::MultiKrum { .. } => "mkrum",
            Aggregator::RKrum => "rkrum",
            Aggregator::ArKrum => "arkrum",
        }
    }
}
