//! Histogram of 2-D Chebyshev expansion coefficients.

use super::plane::Plane;

pub const ORDER: usize = 20;
pub const BINS: usize = 32;

/// `T_0..=T_ORDER` at `n` points spread evenly over `[-1, 1]`, as `[k][i]`.
fn basis(n: usize) -> Vec<[f64; ORDER + 1]> {
    (0..n)
        .map(|k| {
            let t = if n > 1 {
                2.0 * k as f64 / (n - 1) as f64 - 1.0
            } else {
                0.0
            };
            let mut row = [0.0; ORDER + 1];
            row[0] = 1.0;
            row[1] = t;
            for i in 2..=ORDER {
                row[i] = 2.0 * t * row[i - 1] - row[i - 2];
            }
            row
        })
        .collect()
}

/// Projection coefficients `c[j][i]` of the mean-centred plane onto
/// `T_i(x) T_j(y)`, averaged over pixels.
pub fn coefficients(plane: &Plane) -> Vec<f64> {
    let (w, h) = (plane.width, plane.height);
    let mean = plane.mean();
    let bx = basis(w);
    let by = basis(h);
    let mut rows = vec![[0.0; ORDER + 1]; h];
    for (y, row) in rows.iter_mut().enumerate() {
        for (x, tx) in bx.iter().enumerate() {
            let v = plane.at(x, y) - mean;
            if v != 0.0 {
                for i in 0..=ORDER {
                    row[i] += v * tx[i];
                }
            }
        }
    }
    let scale = 1.0 / (w * h) as f64;
    let mut coefs = Vec::with_capacity((ORDER + 1) * (ORDER + 1));
    for j in 0..=ORDER {
        for i in 0..=ORDER {
            let c: f64 = rows.iter().zip(&by).map(|(row, ty)| row[i] * ty[j]).sum();
            coefs.push(c * scale);
        }
    }
    coefs
}

/// Normalised 32-bin histogram of the coefficients over their own range;
/// uniform when every coefficient is equal.
pub fn chebyshev(plane: &Plane) -> Vec<f64> {
    let coefs = coefficients(plane);
    let lo = coefs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = coefs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![1.0 / BINS as f64; BINS];
    }
    let mut hist = vec![0.0; BINS];
    let step = (hi - lo) / BINS as f64;
    for c in &coefs {
        let bin = (((c - lo) / step) as usize).min(BINS - 1);
        hist[bin] += 1.0;
    }
    let n = coefs.len() as f64;
    hist.iter_mut().for_each(|v| *v /= n);
    hist
}

pub fn names() -> Vec<String> {
    (0..BINS).map(|b| format!("coef_hist_{b}")).collect()
}
