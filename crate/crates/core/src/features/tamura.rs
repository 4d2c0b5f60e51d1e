//! Tamura coarseness, contrast and directionality.

use std::f64::consts::PI;

use super::edges::prewitt;
use super::plane::Plane;

const SCALES: usize = 5;
const DIRECTION_BINS: usize = 16;
/// Minimum mean absolute gradient for a pixel to count towards directionality.
const DIRECTION_THRESHOLD: f64 = 12.0;

pub const NAMES: [&str; 6] = [
    "coarseness",
    "contrast",
    "directionality",
    "coarseness_fine",
    "coarseness_medium",
    "coarseness_coarse",
];

struct Integral {
    w: usize,
    h: usize,
    table: Vec<f64>,
}

impl Integral {
    fn new(plane: &Plane) -> Self {
        let (w, h) = (plane.width, plane.height);
        let mut table = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += plane.at(x, y);
                table[(y + 1) * (w + 1) + x + 1] = table[y * (w + 1) + x + 1] + row;
            }
        }
        Integral { w, h, table }
    }

    /// Mean over the window of side `2 * half` centred on `(x, y)`, clipped
    /// to the plane.
    fn window_mean(&self, x: isize, y: isize, half: isize) -> f64 {
        let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize) as usize;
        let (x0, x1) = (clamp(x - half, self.w), clamp(x + half, self.w));
        let (y0, y1) = (clamp(y - half, self.h), clamp(y + half, self.h));
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let s = self.w + 1;
        let sum = self.table[y1 * s + x1] + self.table[y0 * s + x0] - self.table[y0 * s + x1] - self.table[y1 * s + x0];
        sum / ((x1 - x0) * (y1 - y0)) as f64
    }
}

/// Per-pixel best scale index `k` in `1..=5` (window side `2^k`).
fn best_scales(plane: &Plane) -> Vec<usize> {
    let integral = Integral::new(plane);
    let mut best = Vec::with_capacity(plane.len());
    for y in 0..plane.height as isize {
        for x in 0..plane.width as isize {
            let mut best_k = 1;
            let mut best_e = f64::NEG_INFINITY;
            for k in 1..=SCALES {
                let half = 1isize << (k - 1);
                let eh = (integral.window_mean(x + half, y, half) - integral.window_mean(x - half, y, half)).abs();
                let ev = (integral.window_mean(x, y + half, half) - integral.window_mean(x, y - half, half)).abs();
                let e = eh.max(ev);
                if e > best_e {
                    best_e = e;
                    best_k = k;
                }
            }
            best.push(best_k);
        }
    }
    best
}

pub fn tamura(plane: &Plane) -> Vec<f64> {
    let n = plane.len() as f64;

    let scales = best_scales(plane);
    let coarseness = scales.iter().map(|&k| (1usize << k) as f64).sum::<f64>() / n;
    let mut coarse_counts = [0usize; 3];
    for &k in &scales {
        let bin = match k {
            1 | 2 => 0,
            3 => 1,
            _ => 2,
        };
        coarse_counts[bin] += 1;
    }
    let coarse_hist = coarse_counts.map(|c| c as f64 / n);

    let mean = plane.mean();
    let (mut m2, mut m4) = (0.0, 0.0);
    for &v in &plane.data {
        let d2 = (v - mean).powi(2);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    let contrast = if m2 > 0.0 {
        let kurtosis = (m4 / (m2 * m2)).max(1e-9);
        m2.sqrt() / kurtosis.powf(0.25)
    } else {
        0.0
    };

    let mut histogram = [0.0; DIRECTION_BINS];
    let mut counted = 0usize;
    for (gx, gy) in prewitt(plane) {
        // Prewitt sums three differences; scale to a mean difference
        let (dh, dv) = (gx / 3.0, gy / 3.0);
        if (dh.abs() + dv.abs()) / 2.0 < DIRECTION_THRESHOLD {
            continue;
        }
        // orientation in [0, pi)
        let theta = dv.atan2(dh).rem_euclid(PI);
        let bin = ((theta / PI * DIRECTION_BINS as f64) as usize).min(DIRECTION_BINS - 1);
        histogram[bin] += 1.0;
        counted += 1;
    }
    if counted == 0 {
        histogram = [1.0 / DIRECTION_BINS as f64; DIRECTION_BINS];
    } else {
        histogram.iter_mut().for_each(|v| *v /= counted as f64);
    }
    let peak = (0..DIRECTION_BINS).fold(0, |best, b| if histogram[b] > histogram[best] { b } else { best });
    let half = DIRECTION_BINS / 2;
    let spread: f64 = histogram
        .iter()
        .enumerate()
        .map(|(b, &v)| {
            let d = b.abs_diff(peak);
            let d = d.min(DIRECTION_BINS - d) as f64;
            v * d * d
        })
        .sum();
    let directionality = 1.0 - spread / (half * half) as f64;

    vec![
        coarseness,
        contrast,
        directionality,
        coarse_hist[0],
        coarse_hist[1],
        coarse_hist[2],
    ]
}
