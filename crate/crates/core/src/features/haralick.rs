//! Gray-level co-occurrence statistics.
//!
//! Intensities are quantised to 16 levels. One symmetric, normalised
//! co-occurrence matrix is built per direction (0, 45, 90 and 135 degrees at
//! distance 1), the 13 classic statistics are computed on each, and the mean
//! and range over the four directions are reported.

use super::plane::{entropy_term, intensity_bin, Plane};

pub const LEVELS: usize = 16;

pub const STATISTICS: [&str; 13] = [
    "angular_second_moment",
    "contrast",
    "correlation",
    "sum_of_squares",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_variance",
    "difference_entropy",
    "info_correlation_1",
    "info_correlation_2",
];

pub const FEATURE_COUNT: usize = 2 * STATISTICS.len();

/// `(dx, dy)` neighbour offsets; y grows downwards.
const DIRECTIONS: [(isize, isize); 4] = [(1, 0), (1, -1), (0, -1), (-1, -1)];

type Glcm = [[f64; LEVELS]; LEVELS];

/// Symmetric co-occurrence matrix normalised to sum 1, or `None` if the
/// plane has no pixel pairs along this direction.
fn cooccurrence(levels: &[usize], width: usize, height: usize, (dx, dy): (isize, isize)) -> Option<Glcm> {
    let mut counts = [[0u64; LEVELS]; LEVELS];
    let mut total = 0u64;
    for y in 0..height as isize {
        let ny = y + dy;
        if ny < 0 || ny >= height as isize {
            continue;
        }
        for x in 0..width as isize {
            let nx = x + dx;
            if nx < 0 || nx >= width as isize {
                continue;
            }
            let a = levels[y as usize * width + x as usize];
            let b = levels[ny as usize * width + nx as usize];
            counts[a][b] += 1;
            counts[b][a] += 1;
            total += 2;
        }
    }
    if total == 0 {
        return None;
    }
    let mut p = [[0.0; LEVELS]; LEVELS];
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            p[i][j] = counts[i][j] as f64 / total as f64;
        }
    }
    Some(p)
}

fn statistics(p: &Glcm) -> [f64; 13] {
    let mut px = [0.0; LEVELS];
    let mut p_sum = [0.0; 2 * LEVELS - 1];
    let mut p_diff = [0.0; LEVELS];
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            let v = p[i][j];
            px[i] += v;
            p_sum[i + j] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }
    // symmetric matrix: py == px
    let mu: f64 = px.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
    let var: f64 = px.iter().enumerate().map(|(i, v)| (i as f64 - mu).powi(2) * v).sum();

    let mut asm = 0.0;
    let mut idm = 0.0;
    let mut cross = 0.0;
    let mut entropy = 0.0;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            let v = p[i][j];
            let d = i as f64 - j as f64;
            asm += v * v;
            idm += v / (1.0 + d * d);
            cross += (i as f64) * (j as f64) * v;
            entropy += entropy_term(v);
            let q = px[i] * px[j];
            if q > 0.0 {
                hxy1 -= v * q.ln();
                hxy2 -= q * q.ln();
            }
        }
    }
    let hx: f64 = px.iter().map(|&v| entropy_term(v)).sum();

    let contrast: f64 = p_diff.iter().enumerate().map(|(k, v)| (k * k) as f64 * v).sum();
    let correlation = if var > 0.0 { (cross - mu * mu) / var } else { 0.0 };
    let sum_average: f64 = p_sum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sum_variance: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - sum_average).powi(2) * v)
        .sum();
    let sum_entropy: f64 = p_sum.iter().map(|&v| entropy_term(v)).sum();
    let diff_mean: f64 = p_diff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let diff_variance: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - diff_mean).powi(2) * v)
        .sum();
    let diff_entropy: f64 = p_diff.iter().map(|&v| entropy_term(v)).sum();
    let imc1 = if hx > 0.0 { (entropy - hxy1) / hx } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2 - entropy).max(0.0)).exp()).max(0.0).sqrt();

    [
        asm,
        contrast,
        correlation,
        var,
        idm,
        sum_average,
        sum_variance,
        sum_entropy,
        entropy,
        diff_variance,
        diff_entropy,
        imc1,
        imc2,
    ]
}

/// Per-direction statistics, indexed `[direction][statistic]`.
pub fn directional_statistics(plane: &Plane) -> [[f64; 13]; 4] {
    let levels: Vec<usize> = plane.data.iter().map(|&v| intensity_bin(v, LEVELS)).collect();
    let mut out = [[0.0; 13]; 4];
    for (d, &offset) in DIRECTIONS.iter().enumerate() {
        if let Some(p) = cooccurrence(&levels, plane.width, plane.height, offset) {
            out[d] = statistics(&p);
        }
    }
    out
}

/// `[stat0_mean, stat0_range, stat1_mean, ...]`.
pub fn haralick(plane: &Plane) -> Vec<f64> {
    let per_direction = directional_statistics(plane);
    let mut out = Vec::with_capacity(FEATURE_COUNT);
    for s in 0..STATISTICS.len() {
        let values = per_direction.map(|d| d[s]);
        let mean = values.iter().sum::<f64>() / 4.0;
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(mean);
        out.push(max - min);
    }
    out
}

pub fn names() -> Vec<String> {
    STATISTICS
        .iter()
        .flat_map(|s| [format!("{s}_mean"), format!("{s}_range")])
        .collect()
}
