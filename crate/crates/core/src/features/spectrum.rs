//! 2-D discrete Fourier transform and the log-magnitude plane derived from it.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::plane::Plane;

/// Unnormalised forward 2-D DFT of a real plane, row-major.
pub fn fft2(plane: &Plane) -> Vec<Complex64> {
    let (w, h) = (plane.width, plane.height);
    let mut planner = FftPlanner::<f64>::new();
    let mut data: Vec<Complex64> = plane.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();

    let row_fft = planner.plan_fft_forward(w);
    for row in data.chunks_exact_mut(w) {
        row_fft.process(row);
    }

    let col_fft = planner.plan_fft_forward(h);
    let mut column = vec![Complex64::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
    data
}

/// Signed frequency of DFT bin `k` of an `n`-point transform, in cycles/pixel.
#[inline]
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64 / n as f64
    } else {
        k as f64 / n as f64 - 1.0
    }
}

/// `ln(1 + |F|)`, shifted so the zero frequency sits at the centre and
/// rescaled linearly onto `[0, 255]`. A flat spectrum maps to all zeros.
pub fn log_magnitude_plane(spectrum: &[Complex64], width: usize, height: usize) -> Plane {
    let mut data = vec![0.0; width * height];
    let (sx, sy) = (width / 2, height / 2);
    for y in 0..height {
        for x in 0..width {
            let v = spectrum[y * width + x].norm().ln_1p();
            data[((y + sy) % height) * width + (x + sx) % width] = v;
        }
    }
    let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let range = hi - lo;
    if range > 0.0 {
        for v in &mut data {
            *v = (*v - lo) / range * 255.0;
        }
    } else {
        data.iter_mut().for_each(|v| *v = 0.0);
    }
    Plane { width, height, data }
}
