//! Ranking and correlation kernels.
//!
//! Ranks use the mid-rank convention for ties throughout. `-0.0` and `0.0`
//! rank as equal. Spatial percentiles also tie values that differ only by
//! floating-point rounding, see [`TIE_TOLERANCE`].

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn cmp_f64(a: f64, b: f64) -> Ordering {
    // Adding 0.0 folds -0.0 into 0.0 so that total_cmp agrees with ==.
    (a + 0.0).total_cmp(&(b + 0.0))
}

/// Relative gap below which two values share a spatial rank. Temporal means
/// of the same days summed in different orders land a few ulps apart.
pub const TIE_TOLERANCE: f64 = 1e-12;

fn rank_tied(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Cross-region percentile of each entry on [0, 1].
///
/// Over the `N` present entries, percentile = (mid-rank - 1) / (N - 1) with
/// ascending ranks, so the smallest value maps to 0 and the largest to 1. A
/// single present entry maps to 0.5. Missing (and NaN) entries stay missing.
pub fn spatial_percentile(values: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut present: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.filter(|x| !x.is_nan()).map(|x| (i, x)))
        .collect();
    let mut out = vec![None; values.len()];
    let n = present.len();
    if n == 0 {
        return out;
    }
    if n == 1 {
        out[present[0].0] = Some(0.5);
        return out;
    }
    present.sort_by(|a, b| cmp_f64(a.1, b.1).then(a.0.cmp(&b.0)));
    let denom = 2.0 * (n - 1) as f64;
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && rank_tied(present[end + 1].1, present[start].1) {
            end += 1;
        }
        // (mid-rank - 1) = (start + end) / 2 in zero-based positions.
        let pct = (start + end) as f64 / denom;
        for &(i, _) in &present[start..=end] {
            out[i] = Some(pct);
        }
        start = end + 1;
    }
    out
}

/// Mid-point empirical percentile of `x` in an ascending `sample`:
/// (count below + half the count equal) / size.
pub fn empirical_percentile(sorted: &[f64], x: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let below = sorted.partition_point(|&v| v < x);
    let not_above = sorted.partition_point(|&v| v <= x);
    (below as f64 + 0.5 * (not_above - below) as f64) / sorted.len() as f64
}

/// Fraction of an ascending `sample` that is at most `x`.
pub fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Quantile of an ascending sample, the inverse of [`empirical_percentile`]:
/// value at zero-based position `q * n - 0.5`, linearly interpolated and
/// clamped to the sample range.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let h = (q * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Mean of the present values, `None` if there are none.
///
/// Accumulates deviations from the first value, so a constant input returns
/// that constant exactly.
pub fn mean(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut iter = values.into_iter().flatten();
    let first = iter.next()?;
    let mut n = 1usize;
    let mut dev = 0.0;
    for v in iter {
        dev += v - first;
        n += 1;
    }
    Some(first + dev / n as f64)
}

/// Kendall's tau-b between `x` and `y`, dropping pairs with a missing member.
///
/// Uses Knight's O(n log n) algorithm: sort by (x, y), count ties, then count
/// discordant pairs as the inversions of `y` found by a merge sort.
pub fn kendall_tau(x: &[Option<f64>], y: &[Option<f64>]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "kendall_tau: length mismatch {} != {}",
            x.len(),
            y.len()
        )));
    }
    let mut pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) if !a.is_nan() && !b.is_nan() => Some((*a + 0.0, *b + 0.0)),
            _ => None,
        })
        .collect();
    let n = pairs.len();
    if n < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two complete pairs"));
    }
    pairs.sort_by(|a, b| cmp_f64(a.0, b.0).then(cmp_f64(a.1, b.1)));

    let n0 = (n * (n - 1) / 2) as u64;
    let tie_pairs = |run: u64| run * (run - 1) / 2;

    // Ties in x, and joint ties in (x, y).
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                ties_xy += tie_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            ties_x += tie_pairs(run_x);
            ties_xy += tie_pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += tie_pairs(run_x);
    ties_xy += tie_pairs(run_xy);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    // ys is now sorted; count ties in y.
    let mut ties_y = 0u64;
    let mut run_y = 1u64;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run_y += 1;
        } else {
            ties_y += tie_pairs(run_y);
            run_y = 1;
        }
    }
    ties_y += tie_pairs(run_y);

    if ties_x == n0 || ties_y == n0 {
        return Err(Error::UndefinedCorrelation("a variable is constant"));
    }

    // concordant - discordant = n0 - ties_x - ties_y + ties_xy - 2 * discordant
    let numerator = n0 as i128 - ties_x as i128 - ties_y as i128 + ties_xy as i128 - 2 * swaps as i128;
    let denominator = ((n0 - ties_x) as f64 * (n0 - ties_y) as f64).sqrt();
    Ok((numerator as f64 / denominator).clamp(-1.0, 1.0))
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = v.split_at_mut(mid);
    let mut swaps = merge_count(left, &mut buf[..mid]) + merge_count(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if right[j] < left[i] {
            buf[k] = right[j];
            swaps += (left.len() - i) as u64;
            j += 1;
        } else {
            buf[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    swaps
}
