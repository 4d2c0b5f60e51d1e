//! Differential box-counting fractal signature.

use super::plane::Plane;

pub const SCALES: [usize; 6] = [2, 4, 8, 16, 32, 64];
const GRAY_LEVELS: f64 = 256.0;

/// `ln N_s` for each box size `s`, then the least-squares slope of
/// `ln N_s` against `ln(1/s)`. Blocks at the right and bottom edges may be
/// partial.
pub fn fractal(plane: &Plane) -> Vec<f64> {
    let (w, h) = (plane.width, plane.height);
    let side = w.min(h) as f64;
    let mut log_counts = Vec::with_capacity(SCALES.len());
    for &s in &SCALES {
        let box_height = s as f64 * GRAY_LEVELS / side;
        let mut count = 0.0;
        for by in (0..h).step_by(s) {
            for bx in (0..w).step_by(s) {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for y in by..(by + s).min(h) {
                    for x in bx..(bx + s).min(w) {
                        let v = plane.at(x, y);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                count += (hi / box_height).floor() - (lo / box_height).floor() + 1.0;
            }
        }
        log_counts.push(count.ln());
    }
    let xs: Vec<f64> = SCALES.iter().map(|&s| -(s as f64).ln()).collect();
    let slope = least_squares_slope(&xs, &log_counts);
    log_counts.push(slope);
    log_counts
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn names() -> Vec<String> {
    let mut names: Vec<String> = SCALES.iter().map(|s| format!("log_boxes_{s}")).collect();
    names.push("dimension".into());
    names
}
