//! Order statistics shared by the onset picker and the output activation.
//!
//! Every percentile in this crate is a nearest-rank percentile taken from
//! above: the p-th percentile of n sorted values is the value at 1-based rank
//! ⌊p/100 · n⌋ + 1 (clamped to n), so more than p percent of the values lie
//! strictly below it. For 1..=100 the 98th percentile is 99; for 128 values
//! the 75th percentile is the 97th smallest, leaving exactly 32 at or above.

use std::cmp::Ordering;

/// 1-based nearest rank for percentile `p` (0 < p ≤ 100) over `n` values.
pub fn nearest_rank(p: f64, n: usize) -> usize {
    debug_assert!(n > 0);
    let rank = (p * n as f64 / 100.0).floor() as usize + 1;
    rank.clamp(1, n)
}

/// Nearest-rank percentile. Returns `None` for an empty slice.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Some(sorted[nearest_rank(p, sorted.len()) - 1])
}

/// Indices of the `keep` largest values. Ties are resolved in favour of the
/// lower index. The result is sorted ascending.
pub fn top_k_indices(values: &[f64], keep: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(keep);
    order.sort_unstable();
    order
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Median by sorting; even-length inputs average the two middle values.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}
