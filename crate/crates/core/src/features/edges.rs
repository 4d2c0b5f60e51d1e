//! Prewitt gradient statistics.

use super::plane::Plane;
use super::stats::median;

pub const DIRECTION_BINS: usize = 8;
pub const FEATURE_COUNT: usize = 3 + 1 + DIRECTION_BINS + 1;

/// Prewitt responses `(gx, gy)` for every interior pixel.
pub(crate) fn prewitt(plane: &Plane) -> Vec<(f64, f64)> {
    let (w, h) = (plane.width, plane.height);
    if w < 3 || h < 3 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (plane.at(x + 1, y - 1) + plane.at(x + 1, y) + plane.at(x + 1, y + 1))
                - (plane.at(x - 1, y - 1) + plane.at(x - 1, y) + plane.at(x - 1, y + 1));
            let gy = (plane.at(x - 1, y + 1) + plane.at(x, y + 1) + plane.at(x + 1, y + 1))
                - (plane.at(x - 1, y - 1) + plane.at(x, y - 1) + plane.at(x + 1, y - 1));
            out.push((gx, gy));
        }
    }
    out
}

/// Magnitude mean, stddev and median; fraction of pixels above the mean
/// magnitude; 8-bin direction histogram over those pixels (uniform if there
/// are none); and the largest histogram bin.
pub fn edge_stats(plane: &Plane) -> Vec<f64> {
    let gradients = prewitt(plane);
    let magnitudes: Vec<f64> = gradients.iter().map(|(gx, gy)| gx.hypot(*gy)).collect();

    let (mean, stddev, med) = if magnitudes.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let n = magnitudes.len() as f64;
        let mean = magnitudes.iter().sum::<f64>() / n;
        let var = magnitudes.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt(), median(&magnitudes))
    };

    let mut histogram = [0.0; DIRECTION_BINS];
    let mut edge_pixels = 0usize;
    for (&(gx, gy), &mag) in gradients.iter().zip(&magnitudes) {
        if mag > mean {
            let angle = gy.atan2(gx) + std::f64::consts::PI;
            let bin = ((angle / std::f64::consts::TAU * DIRECTION_BINS as f64) as usize).min(DIRECTION_BINS - 1);
            histogram[bin] += 1.0;
            edge_pixels += 1;
        }
    }
    if edge_pixels == 0 {
        histogram = [1.0 / DIRECTION_BINS as f64; DIRECTION_BINS];
    } else {
        histogram.iter_mut().for_each(|v| *v /= edge_pixels as f64);
    }
    let fraction = if magnitudes.is_empty() {
        0.0
    } else {
        edge_pixels as f64 / magnitudes.len() as f64
    };
    let homogeneity = histogram.iter().cloned().fold(0.0, f64::max);

    let mut out = Vec::with_capacity(FEATURE_COUNT);
    out.extend([mean, stddev, med, fraction]);
    out.extend(histogram);
    out.push(homogeneity);
    out
}

pub fn names() -> Vec<String> {
    let mut names: Vec<String> = [
        "magnitude_mean",
        "magnitude_stddev",
        "magnitude_median",
        "edge_fraction",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend((0..DIRECTION_BINS).map(|b| format!("direction_{b}")));
    names.push("direction_homogeneity".into());
    names
}
