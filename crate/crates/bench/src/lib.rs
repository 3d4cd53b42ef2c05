//! Seeded workloads shared by the benchmarks.

use fedkrum_core::rng::stream_from_seed;
use fedkrum_core::UpdateSet;
use rand::Rng;

/// `honest` updates near the origin plus `byzantine` updates scaled by 100.
pub fn update_set(honest: usize, byzantine: usize, dim: usize, seed: u64) -> UpdateSet {
    let mut rng = stream_from_seed(seed);
    let rows = (0..honest + byzantine).map(|i| {
        let scale = if i < honest { 1.0 } else { 100.0 };
        (0..dim)
            .map(|_| scale * rng.random_range(-1.0..1.0))
            .collect::<Vec<f64>>()
    });
    UpdateSet::from_rows(rows).expect("finite, equal-length rows")
}

/// A sorted row of `m` distances with a low cluster and a high tail.
pub fn distance_row(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_from_seed(seed);
    let mut row: Vec<f64> = (0..m)
        .map(|i| {
            if i < m / 2 {
                rng.random_range(0.0..1.0)
            } else {
                rng.random_range(1e3..1e4)
            }
        })
        .collect();
    row.sort_by(f64::total_cmp);
    row
}
