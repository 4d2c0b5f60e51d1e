//! Gabor filter-bank energies, evaluated in the frequency domain.
//!
//! Each filter is a Gaussian transfer function centred on
//! `f * (cos t, sin t)`. The mean squared response over the plane follows
//! from Parseval's identity, so no inverse transforms are needed.

use rustfft::num_complex::Complex64;

use super::spectrum::bin_frequency;

pub const FREQUENCY_COUNT: usize = 7;
pub const ORIENTATIONS: usize = 4;
const LOWEST: f64 = 0.05;
const HIGHEST: f64 = 0.4;
/// Gaussian radius of each pass band relative to its centre frequency.
const RELATIVE_BANDWIDTH: f64 = 0.4;

pub fn frequencies() -> [f64; FREQUENCY_COUNT] {
    let ratio = HIGHEST / LOWEST;
    std::array::from_fn(|i| LOWEST * ratio.powf(i as f64 / (FREQUENCY_COUNT - 1) as f64))
}

/// Orientation-pooled mean response energy per centre frequency. `spectrum`
/// is the DFT of the plane; its zero-frequency bin is ignored so responses
/// are computed on the mean-centred plane.
pub fn gabor(spectrum: &[Complex64], width: usize, height: usize) -> Vec<f64> {
    let n = (width * height) as f64;
    let power: Vec<(f64, f64, f64)> = (0..height)
        .flat_map(|ky| (0..width).map(move |kx| (kx, ky)))
        .filter(|&(kx, ky)| kx != 0 || ky != 0)
        .map(|(kx, ky)| {
            (
                bin_frequency(kx, width),
                bin_frequency(ky, height),
                spectrum[ky * width + kx].norm_sqr(),
            )
        })
        .collect();

    frequencies()
        .iter()
        .map(|&f| {
            let sigma = RELATIVE_BANDWIDTH * f;
            let inv = 1.0 / (sigma * sigma);
            let mut pooled = 0.0;
            for o in 0..ORIENTATIONS {
                let theta = o as f64 * std::f64::consts::PI / ORIENTATIONS as f64;
                let (cu, cv) = (f * theta.cos(), f * theta.sin());
                let energy: f64 = power
                    .iter()
                    .map(|&(u, v, p)| {
                        let d2 = (u - cu).powi(2) + (v - cv).powi(2);
                        // |G|^2 = exp(-d^2 / sigma^2)
                        p * (-d2 * inv).exp()
                    })
                    .sum();
                pooled += energy / (n * n);
            }
            pooled / ORIENTATIONS as f64
        })
        .collect()
}

pub fn names() -> Vec<String> {
    (0..FREQUENCY_COUNT).map(|i| format!("energy_f{i}")).collect()
}
