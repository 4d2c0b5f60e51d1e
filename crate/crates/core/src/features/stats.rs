//! First-order intensity statistics and multi-resolution histograms.

use super::plane::{intensity_bin, Plane};

pub const INTENSITY_STATS: [&str; 5] = ["mean", "stddev", "skewness", "kurtosis", "median"];
pub const HISTOGRAM_BINS: [usize; 4] = [3, 5, 7, 9];
pub const HISTOGRAM_LEN: usize = 3 + 5 + 7 + 9;

/// Mean, population standard deviation, skewness, excess kurtosis and
/// median. Skewness and kurtosis are 0 for a flat plane.
pub fn intensity_stats(plane: &Plane) -> [f64; 5] {
    let n = plane.len() as f64;
    let mean = plane.mean();
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in &plane.data {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let stddev = m2.sqrt();
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / (m2 * stddev), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    [mean, stddev, skewness, kurtosis, median(&plane.data)]
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// Normalised histograms with 3, 5, 7 and 9 bins over `[0, 255]`, concatenated.
pub fn multiscale_histogram(plane: &Plane) -> Vec<f64> {
    let n = plane.len() as f64;
    let mut out = Vec::with_capacity(HISTOGRAM_LEN);
    for bins in HISTOGRAM_BINS {
        let mut counts = vec![0usize; bins];
        for &v in &plane.data {
            counts[intensity_bin(v, bins)] += 1;
        }
        out.extend(counts.into_iter().map(|c| c as f64 / n));
    }
    out
}

pub fn histogram_names() -> Vec<String> {
    HISTOGRAM_BINS
        .iter()
        .flat_map(|&bins| (0..bins).map(move |b| format!("hist{bins}_{b}")))
        .collect()
}
