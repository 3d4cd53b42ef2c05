//! Slow, literal reference implementations used to cross-check the fast
//! paths, plus randomized suites that compare the two.
//!
//! Nothing here calls into the code it checks: Krum scores are recomputed
//! with naive loops, the median filter is a line-by-line transcription with
//! 1-based indices, the change-point search evaluates every split from
//! scratch, and gradients come from central finite differences. The `oracle`
//! CLI subcommand and the acceptance tests run the suites.

use rand::Rng;

use crate::aggregation::{self, UpdateSet};
use crate::changepoint::{self, SseSplit};
use crate::error::TrainingError;
use crate::rng::stream_from_seed;
use crate::training::{self, ModelLayout, ModelParams};

/// Lowest index among the minimal values.
pub fn argmin_lowest_index(values: &[f64]) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values.iter().position(|&v| v == min).expect("nonempty")
}

fn naive_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..a.len() {
        total += (a[k] - b[k]) * (a[k] - b[k]);
    }
    total
}

fn naive_sorted_row(updates: &[Vec<f64>], i: usize) -> Vec<f64> {
    let mut row = Vec::new();
    for j in 0..updates.len() {
        if j != i {
            row.push(naive_sq_dist(&updates[i], &updates[j]));
        }
    }
    // insertion sort
    for a in 1..row.len() {
        let mut b = a;
        while b > 0 && row[b - 1] > row[b] {
            row.swap(b - 1, b);
            b -= 1;
        }
    }
    row
}

fn sum_first(row: &[f64], count: usize) -> f64 {
    let mut s = 0.0;
    for v in row.iter().take(count) {
        s += v;
    }
    s
}

/// Krum winner and all scores, by triple loop.
pub fn brute_force_krum(updates: &[Vec<f64>], f: usize) -> (usize, Vec<f64>) {
    let n = updates.len();
    let window = n - f - 2;
    let scores: Vec<f64> = (0..n)
        .map(|i| sum_first(&naive_sorted_row(updates, i), window))
        .collect();
    (argmin_lowest_index(&scores), scores)
}

/// rKrum scores with the split found by [`brute_force_sse_split`].
pub fn brute_force_rkrum_scores(updates: &[Vec<f64>]) -> Vec<f64> {
    let n = updates.len();
    (0..n)
        .map(|i| {
            let row = naive_sorted_row(updates, i);
            let f_hat = if row.len() < changepoint::MIN_SEGMENTABLE {
                0
            } else {
                row.len() - brute_force_sse_split(&row).split
            };
            let window = (n as isize - f_hat as isize - 2).max(1) as usize;
            sum_first(&row, window)
        })
        .collect()
}

pub fn naive_mean(updates: &[Vec<f64>], indices: &[usize]) -> Vec<f64> {
    let d = updates[0].len();
    let mut out = vec![0.0; d];
    for k in 0..d {
        let mut s = 0.0;
        for &i in indices {
            s += updates[i][k];
        }
        out[k] = s / indices.len() as f64;
    }
    out
}

/// Median-threshold filter transcribed with 1-based arrays. Returns the
/// kept length `n'` and the threshold `tau`.
pub fn filter_by_pseudocode(sorted: &[f64]) -> (usize, f64) {
    let n = sorted.len();
    // d[1..=n]; index 0 unused
    let mut d = vec![f64::NAN];
    d.extend_from_slice(sorted);
    let mid = n / 2;
    let median = d[mid];
    let delta_max = median - d[1];
    let tau = median + delta_max;
    let mut j_max = n;
    let mut j = mid + 1;
    while j <= n {
        if d[j] > tau {
            j_max = j - 1;
            break;
        }
        j += 1;
    }
    (j_max, tau)
}

fn sse_of(segment: &[f64]) -> f64 {
    let mean = segment.iter().sum::<f64>() / segment.len() as f64;
    segment.iter().map(|x| (x - mean) * (x - mean)).sum()
}

/// Every split evaluated from scratch; ties resolved toward the largest
/// left segment.
pub fn brute_force_sse_split(row: &[f64]) -> SseSplit {
    let m = row.len();
    let candidates: Vec<SseSplit> = (1..m)
        .map(|k| SseSplit {
            split: k,
            left_sse: sse_of(&row[..k]),
            right_sse: sse_of(&row[k..]),
        })
        .collect();
    let best_total = candidates
        .iter()
        .map(|c| c.left_sse + c.right_sse)
        .fold(f64::INFINITY, f64::min);
    *candidates
        .iter()
        .rev()
        .find(|c| c.left_sse + c.right_sse == best_total)
        .expect("m >= 2")
}

/// Largest relative error between backprop and central differences over
/// every parameter. Denominators are floored at `1e-6` so that coordinates
/// whose true gradient is zero are judged on absolute error.
pub fn gradient_check(
    params: &ModelParams,
    features: &[f64],
    labels: &[usize],
    h: f64,
) -> Result<f64, TrainingError> {
    let layout: &ModelLayout = params.layout();
    let analytic = training::backward(params, features, labels)?
        .params
        .flatten();
    let base = params.flatten().into_inner();
    let mut worst: f64 = 0.0;
    for k in 0..base.len() {
        let mut plus = base.clone();
        plus[k] += h;
        let mut minus = base.clone();
        minus[k] -= h;
        let lp = training::mean_cross_entropy(
            &ModelParams::unflatten(&plus.into(), layout)?,
            features,
            labels,
        )?;
        let lm = training::mean_cross_entropy(
            &ModelParams::unflatten(&minus.into(), layout)?,
            features,
            labels,
        )?;
        let numeric = (lp - lm) / (2.0 * h);
        let a = analytic.as_slice()[k];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Outcome of one randomized comparison suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub detail: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Fast Krum against [`brute_force_krum`]: random `n <= 12`, `d <= 5`, every
/// legal `f`.
pub fn krum_suite(seed: u64, instances: usize) -> SuiteReport {
    let mut rng = stream_from_seed(seed);
    let mut failures = 0;
    let mut detail = String::new();
    for case in 0..instances {
        let n = rng.random_range(3..=12);
        let d = rng.random_range(1..=5);
        let f = rng.random_range(0..=(n - 3) / 2);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let (expected, _) = brute_force_krum(&rows, f);
        let got =
            UpdateSet::from_rows(rows.clone()).and_then(|u| aggregation::aggregate_krum(&u, f));
        let ok = matches!(&got, Ok(r) if r.selected_index == Some(expected)
            && r.aggregate.as_slice() == &rows[expected][..]);
        if !ok {
            failures += 1;
            if detail.is_empty() {
                detail = format!("case {case}: n={n} d={d} f={f} expected {expected}, got {got:?}");
            }
        }
    }
    SuiteReport {
        name: "krum vs brute force",
        cases: instances,
        failures,
        detail,
    }
}

fn random_sorted_row<R: Rng>(rng: &mut R, max_len: usize) -> Vec<f64> {
    let m = rng.random_range(2..=max_len);
    // mixtures of a tight cluster and a spread tail exercise both branches
    let tail = rng.random_range(0..=m / 2);
    let scale = 10f64.powi(rng.random_range(0..5));
    let mut row: Vec<f64> = (0..m)
        .map(|i| rng.random_range(0.0..if i < m - tail { 1.0 } else { scale }))
        .collect();
    if rng.random_bool(0.1) {
        // exact ties
        let v = row[0];
        for x in row.iter_mut().step_by(2) {
            *x = v;
        }
    }
    row.sort_by(f64::total_cmp);
    row
}

pub fn filter_suite(seed: u64, rows: usize) -> SuiteReport {
    let mut rng = stream_from_seed(seed);
    let mut failures = 0;
    let mut detail = String::new();
    for case in 0..rows {
        let row = random_sorted_row(&mut rng, 40);
        let got = changepoint::filter_extreme_values(&row);
        let (kept, tau) = filter_by_pseudocode(&row);
        let ok = got.kept.len() == kept
            && got.kept[..] == row[..kept]
            && got.removed_count == row.len() - kept
            && got.threshold.to_bits() == tau.to_bits();
        if !ok {
            failures += 1;
            if detail.is_empty() {
                detail = format!(
                    "case {case}: row {row:?} expected n'={kept}, got {}",
                    got.kept.len()
                );
            }
        }
    }
    SuiteReport {
        name: "median filter vs pseudocode",
        cases: rows,
        failures,
        detail,
    }
}

pub fn sse_suite(seed: u64, rows: usize) -> SuiteReport {
    let mut rng = stream_from_seed(seed);
    let mut failures = 0;
    let mut detail = String::new();
    for case in 0..rows {
        let row = random_sorted_row(&mut rng, 64);
        let got = changepoint::sse_split(&row);
        let expected = brute_force_sse_split(&row);
        if got != expected {
            failures += 1;
            if detail.is_empty() {
                detail = format!("case {case}: expected {expected:?}, got {got:?}");
            }
        }
    }
    SuiteReport {
        name: "sse split vs exhaustive search",
        cases: rows,
        failures,
        detail,
    }
}

/// Backprop on a `[3, 4, 2]` network against finite differences (`h = 1e-5`)
/// over `batches` random batches; fails if any relative error reaches `1e-4`.
pub fn gradient_suite(seed: u64, batches: usize) -> SuiteReport {
    let mut rng = stream_from_seed(seed);
    let layout = ModelLayout::new(vec![3, 4, 2], training::DEFAULT_LEAKY_SLOPE).expect("valid");
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..batches {
        let params = training::init_model(&layout, &mut rng);
        let rows = rng.random_range(1..=8);
        let features: Vec<f64> = (0..rows * 3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let labels: Vec<usize> = (0..rows).map(|_| rng.random_range(0..2)).collect();
        let err = gradient_check(&params, &features, &labels, 1e-5).unwrap_or(f64::INFINITY);
        worst = worst.max(err);
        if err >= 1e-4 {
            failures += 1;
        }
    }
    SuiteReport {
        name: "backprop vs finite differences",
        cases: batches,
        failures,
        detail: format!("max relative error {worst:.3e}"),
    }
}

/// The full verification set with the case counts used for acceptance.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    vec![
        krum_suite(seed, 200),
        filter_suite(seed.wrapping_add(1), 100),
        sse_suite(seed.wrapping_add(2), 500),
        gradient_suite(seed.wrapping_add(3), 5),
    ]
}
