//! Zernike moment magnitudes over the largest disk inscribed in the plane.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::plane::Plane;

pub const MAX_ORDER: usize = 12;

/// `(n, m)` pairs with `m >= 0` and `n - m` even, ordered by `n` then `m`.
pub fn orders() -> &'static [(usize, usize)] {
    static ORDERS: OnceLock<Vec<(usize, usize)>> = OnceLock::new();
    ORDERS.get_or_init(|| {
        (0..=MAX_ORDER)
            .flat_map(|n| (n % 2..=n).step_by(2).map(move |m| (n, m)))
            .collect()
    })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Radial polynomial `R_n^m` as `(power, coefficient)` terms.
fn radial_terms() -> &'static [Vec<(usize, f64)>] {
    static TERMS: OnceLock<Vec<Vec<(usize, f64)>>> = OnceLock::new();
    TERMS.get_or_init(|| {
        orders()
            .iter()
            .map(|&(n, m)| {
                (0..=(n - m) / 2)
                    .map(|s| {
                        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                        let c = sign * factorial(n - s)
                            / (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s));
                        (n - 2 * s, c)
                    })
                    .collect()
            })
            .collect()
    })
}

/// `|A_nm|` for every order in [`orders`]. Intensities are mean-centred over
/// the disk; pixel centres are mapped onto the unit disk around the plane
/// centre with the inscribed radius `min(w, h) / 2`.
pub fn zernike(plane: &Plane) -> Vec<f64> {
    let (w, h) = (plane.width, plane.height);
    let radius = w.min(h) as f64 / 2.0;
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);

    // disk samples: (value, rho, cos theta, sin theta)
    let mut samples = Vec::new();
    for y in 0..h {
        let yn = (y as f64 - cy) / radius;
        for x in 0..w {
            let xn = (x as f64 - cx) / radius;
            let rho = (xn * xn + yn * yn).sqrt();
            if rho <= 1.0 {
                let (c, s) = if rho > 0.0 { (xn / rho, yn / rho) } else { (1.0, 0.0) };
                samples.push((plane.at(x, y), rho, c, s));
            }
        }
    }
    let orders = orders();
    if samples.is_empty() {
        return vec![0.0; orders.len()];
    }
    let mean = samples.iter().map(|s| s.0).sum::<f64>() / samples.len() as f64;

    let terms = radial_terms();
    let mut re = vec![0.0; orders.len()];
    let mut im = vec![0.0; orders.len()];
    let mut rho_pow = [0.0; MAX_ORDER + 1];
    let mut cos_m = [0.0; MAX_ORDER + 1];
    let mut sin_m = [0.0; MAX_ORDER + 1];
    for &(value, rho, c, s) in &samples {
        let f = value - mean;
        if f == 0.0 {
            continue;
        }
        rho_pow[0] = 1.0;
        cos_m[0] = 1.0;
        sin_m[0] = 0.0;
        for k in 1..=MAX_ORDER {
            rho_pow[k] = rho_pow[k - 1] * rho;
            cos_m[k] = cos_m[k - 1] * c - sin_m[k - 1] * s;
            sin_m[k] = sin_m[k - 1] * c + cos_m[k - 1] * s;
        }
        for (i, &(_, m)) in orders.iter().enumerate() {
            let radial: f64 = terms[i].iter().map(|&(p, coef)| coef * rho_pow[p]).sum();
            let v = f * radial;
            // conj(V_nm) = R_nm(rho) * exp(-i m theta)
            re[i] += v * cos_m[m];
            im[i] -= v * sin_m[m];
        }
    }
    let pixel_area = 1.0 / (radius * radius);
    orders
        .iter()
        .enumerate()
        .map(|(i, &(n, _))| (n as f64 + 1.0) / PI * pixel_area * re[i].hypot(im[i]))
        .collect()
}

pub fn names() -> Vec<String> {
    orders().iter().map(|(n, m)| format!("z_{n}_{m}")).collect()
}
