use crate::raster::IntensityGrid;

/// Real-valued intensity plane in `[0, 255]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn from_grid(grid: &IntensityGrid) -> Self {
        Plane {
            width: grid.width(),
            height: grid.height(),
            data: grid.pixels().iter().map(|&v| v as f64).collect(),
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Bins `[0, 256)` into `bins` equal intervals.
#[inline]
pub(crate) fn intensity_bin(v: f64, bins: usize) -> usize {
    ((v * bins as f64 / 256.0).floor().max(0.0) as usize).min(bins - 1)
}

/// Shannon term `-p ln p`, zero for `p == 0`.
#[inline]
pub(crate) fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}
