//! Smoothing, start-distance histograms and a uniformity test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Trailing mean over at most `window` values ending at each index.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub window: u64,
    pub first_episode: u64,
    pub last_episode: u64,
    pub bin: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
}

/// Bin index over `[lo, hi]` split into `bins` equal parts; values outside
/// the range land in the first or last bin.
pub fn bin_index(value: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let w = (hi - lo) / bins as f64;
    (((value - lo) / w).floor().max(0.0) as usize).min(bins - 1)
}

/// Histograms of start distance per consecutive block of `window` episodes.
/// `samples` holds (1-based episode number, distance).
pub fn task_histograms(
    samples: &[(u64, f64)],
    window: u64,
    lo: f64,
    hi: f64,
    bins: usize,
) -> Vec<HistogramRow> {
    let Some(last) = samples.iter().map(|s| s.0).max() else {
        return Vec::new();
    };
    let windows = last.div_ceil(window);
    let mut counts = vec![vec![0u64; bins]; windows as usize];
    for &(ep, d) in samples {
        let w = (ep.max(1) - 1) / window;
        counts[w as usize][bin_index(d, lo, hi, bins)] += 1;
    }
    let width = (hi - lo) / bins as f64;
    let mut rows = Vec::new();
    for (w, c) in counts.into_iter().enumerate() {
        for (b, count) in c.into_iter().enumerate() {
            rows.push(HistogramRow {
                window: w as u64,
                first_episode: w as u64 * window + 1,
                last_episode: (w as u64 + 1) * window,
                bin: b,
                bin_lo: lo + b as f64 * width,
                bin_hi: if b + 1 == bins {
                    hi
                } else {
                    lo + (b + 1) as f64 * width
                },
                count,
            });
        }
    }
    rows
}

/// Pearson chi-square statistic against equal expected counts and its p-value.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return (0.0, 1.0);
    }
    let expected = total as f64 / k as f64;
    let stat = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}
