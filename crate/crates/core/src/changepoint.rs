//! Byzantine-count estimation from a client's sorted distance row.
//!
//! A client's squared distances to every other client, sorted ascending, are
//! treated as a sequence with one change point: the left segment holds
//! distances to honest peers, the right segment distances to suspected
//! Byzantine peers. Two pieces live here:
//!
//! - [`filter_extreme_values`]: median-threshold truncation that strips
//!   extreme distances from the tail before segmentation, so a few huge
//!   values cannot drag the change point to the far right.
//! - [`sse_split`]: the single split minimizing the summed within-segment
//!   squared error around each segment's mean.
//!
//! [`estimate_f`] composes them into a per-client estimate `f_hat`.

use serde::{Deserialize, Serialize};

/// Rows shorter than this are not segmented; the estimate is zero.
pub const MIN_SEGMENTABLE: usize = 4;

/// Result of median-threshold filtering on a sorted row.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// Retained prefix of the input row.
    pub kept: Vec<f64>,
    pub removed_count: usize,
    /// `median + (median - row[0])`; `NaN` for degenerate rows.
    pub threshold: f64,
}

/// Drops the tail of `row` starting at the first value (past the lower
/// median) that exceeds `median + (median - min)`.
///
/// `row` must be sorted ascending. Positions follow the 1-based convention:
/// `mid = floor(m / 2)` and the median is the `mid`-th smallest value, so
/// for even `m` this is the lower median. Rows with fewer than two values
/// are returned unchanged.
pub fn filter_extreme_values(row: &[f64]) -> FilterOutcome {
    let m = row.len();
    if m < 2 {
        return FilterOutcome {
            kept: row.to_vec(),
            removed_count: 0,
            threshold: f64::NAN,
        };
    }
    debug_assert!(row.windows(2).all(|w| w[0] <= w[1]), "row must be sorted");

    // 0-based index of the 1-based position floor(m/2)
    let mid = m / 2 - 1;
    let median = row[mid];
    let spread = median - row[0];
    let threshold = median + spread;

    let cut = row[mid + 1..]
        .iter()
        .position(|&d| d > threshold)
        .map_or(m, |offset| mid + 1 + offset);

    FilterOutcome {
        kept: row[..cut].to_vec(),
        removed_count: m - cut,
        threshold,
    }
}

/// Best single split of a sorted row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SseSplit {
    /// Length of the left segment, in `1..m`.
    pub split: usize,
    pub left_sse: f64,
    pub right_sse: f64,
}

impl SseSplit {
    pub fn total(&self) -> f64 {
        self.left_sse + self.right_sse
    }
}

/// Sum of squared deviations from the segment mean. Two passes, summed left
/// to right.
pub(crate) fn segment_sse(segment: &[f64]) -> f64 {
    if segment.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for &x in segment {
        sum += x;
    }
    let mean = sum / segment.len() as f64;
    let mut sse = 0.0;
    for &x in segment {
        let dev = x - mean;
        sse += dev * dev;
    }
    sse
}

/// Split `row` into a left segment of length `k` and a right segment of
/// length `m - k`, choosing the `k` in `1..m` with the smallest total SSE.
///
/// Ties go to the largest `k`. Each candidate is evaluated directly rather
/// than through running sums: rows mix distances near zero with distances in
/// the millions, and prefix-sum variance loses the small segment entirely.
/// Rows shorter than two return `split = m` with zero SSE.
pub fn sse_split(row: &[f64]) -> SseSplit {
    let m = row.len();
    if m < 2 {
        return SseSplit {
            split: m,
            left_sse: 0.0,
            right_sse: 0.0,
        };
    }
    let mut best = SseSplit {
        split: 1,
        left_sse: segment_sse(&row[..1]),
        right_sse: segment_sse(&row[1..]),
    };
    for k in 2..m {
        let candidate = SseSplit {
            split: k,
            left_sse: segment_sse(&row[..k]),
            right_sse: segment_sse(&row[k..]),
        };
        if candidate.total() <= best.total() {
            best = candidate;
        }
    }
    best
}

/// Per-client estimate of the number of Byzantine peers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ByzantineEstimate {
    pub f_hat: usize,
    /// Entries dropped by [`filter_extreme_values`] (zero without the filter).
    pub removed_by_filter: usize,
    /// Left-segment length chosen on the (possibly filtered) row.
    pub sse_change_point: usize,
    pub left_sse: f64,
    pub right_sse: f64,
    /// Set when the row was too short to segment.
    pub degenerate: bool,
}

/// Estimates how many entries of a sorted distance row belong to Byzantine
/// peers.
///
/// Without the filter this is `m - split` on the raw row. With the filter,
/// the removed tail counts as Byzantine and the kept prefix is segmented as
/// well, so `f_hat = removed + (m' - split)` for a kept prefix of length `m'`.
/// Any row (raw or kept prefix) shorter than [`MIN_SEGMENTABLE`] contributes
/// no split term.
pub fn estimate_f(row: &[f64], use_filter: bool) -> ByzantineEstimate {
    let m = row.len();
    if m < MIN_SEGMENTABLE {
        return ByzantineEstimate {
            f_hat: 0,
            removed_by_filter: 0,
            sse_change_point: m,
            left_sse: 0.0,
            right_sse: 0.0,
            degenerate: true,
        };
    }

    let (segmented, removed) = if use_filter {
        let outcome = filter_extreme_values(row);
        (outcome.kept, outcome.removed_count)
    } else {
        (row.to_vec(), 0)
    };

    let kept = segmented.len();
    let split = if kept < MIN_SEGMENTABLE {
        SseSplit {
            split: kept,
            left_sse: segment_sse(&segmented),
            right_sse: 0.0,
        }
    } else {
        sse_split(&segmented)
    };

    ByzantineEstimate {
        f_hat: removed + (kept - split.split),
        removed_by_filter: removed,
        sse_change_point: split.split,
        left_sse: split.left_sse,
        right_sse: split.right_sse,
        degenerate: false,
    }
}
