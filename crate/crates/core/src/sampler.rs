//! Splits an image into the 16 patches that are fed to the feature bank.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::IntensityGrid;

pub const PATCHES_PER_IMAGE: usize = 16;
pub const ROI_WINDOW: usize = 100;
pub const DEFAULT_ROI_STRIDE: usize = 50;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    pub index: usize,
    pub x0: usize,
    pub y0: usize,
    pub grid: IntensityGrid,
}

impl Patch {
    pub fn width(&self) -> usize {
        self.grid.width()
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn overlaps(&self, other: &Patch) -> bool {
        rects_overlap(
            (self.x0, self.y0, self.width(), self.height()),
            (other.x0, other.y0, other.width(), other.height()),
        )
    }
}

/// Axis-aligned rectangles `(x0, y0, w, h)` sharing at least one pixel.
#[inline]
pub fn rects_overlap(a: (usize, usize, usize, usize), b: (usize, usize, usize, usize)) -> bool {
    a.0 < b.0 + b.2 && b.0 < a.0 + a.2 && a.1 < b.1 + b.3 && b.1 < a.1 + a.3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMode {
    Tiles16,
    Roi16 { stride: usize },
}

impl SamplingMode {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingMode::Tiles16 => "tiles",
            SamplingMode::Roi16 { .. } => "roi",
        }
    }

    pub fn sample(&self, grid: &IntensityGrid) -> Result<Vec<Patch>> {
        match *self {
            SamplingMode::Tiles16 => tile16(grid),
            SamplingMode::Roi16 { stride } => roi16(grid, stride),
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    /// Parses `tiles` or `roi`; ROI mode gets the default stride.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tiles" => Ok(SamplingMode::Tiles16),
            "roi" => Ok(SamplingMode::Roi16 {
                stride: DEFAULT_ROI_STRIDE,
            }),
            other => Err(Error::Config(format!(
                "unknown sampling mode '{other}' (expected tiles or roi)"
            ))),
        }
    }
}

/// 4x4 grid of equal tiles, row-major. Remainder rows and columns on the
/// right and bottom are discarded.
pub fn tile16(grid: &IntensityGrid) -> Result<Vec<Patch>> {
    let (w, h) = (grid.width(), grid.height());
    if w < 4 || h < 4 {
        return Err(Error::Sampling(format!(
            "image of {w}x{h} is smaller than the 4x4 tile grid"
        )));
    }
    let (tw, th) = (w / 4, h / 4);
    let mut patches = Vec::with_capacity(PATCHES_PER_IMAGE);
    for row in 0..4 {
        for col in 0..4 {
            let (x0, y0) = (col * tw, row * th);
            patches.push(Patch {
                index: row * 4 + col,
                x0,
                y0,
                grid: grid.crop(x0, y0, tw, th),
            });
        }
    }
    Ok(patches)
}

/// Summed-area tables of intensities and squared intensities.
struct IntegralImage {
    stride: usize,
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

impl IntegralImage {
    fn new(grid: &IntensityGrid) -> Self {
        let (w, h) = (grid.width(), grid.height());
        let stride = w + 1;
        let mut sum = vec![0u64; stride * (h + 1)];
        let mut sum_sq = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let (mut row, mut row_sq) = (0u64, 0u64);
            for x in 0..w {
                let v = grid.get(x, y) as u64;
                row += v;
                row_sq += v * v;
                sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row;
                sum_sq[(y + 1) * stride + x + 1] = sum_sq[y * stride + x + 1] + row_sq;
            }
        }
        IntegralImage { stride, sum, sum_sq }
    }

    fn window(table: &[u64], stride: usize, x0: usize, y0: usize, w: usize, h: usize) -> u64 {
        let (x1, y1) = (x0 + w, y0 + h);
        table[y1 * stride + x1] + table[y0 * stride + x0] - table[y0 * stride + x1] - table[y1 * stride + x0]
    }

    /// `n * sum(v^2) - sum(v)^2`, i.e. `n^2` times the population variance,
    /// exact in integer arithmetic.
    fn scaled_variance(&self, x0: usize, y0: usize, w: usize, h: usize) -> u128 {
        let n = (w * h) as u128;
        let s = Self::window(&self.sum, self.stride, x0, y0, w, h) as u128;
        let sq = Self::window(&self.sum_sq, self.stride, x0, y0, w, h) as u128;
        n * sq - s * s
    }
}

/// A scored candidate window for ROI detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScoredWindow {
    pub x0: usize,
    pub y0: usize,
    /// `n^2 * variance`; orders windows exactly like their standard deviation.
    pub score: u128,
}

impl ScoredWindow {
    pub fn stddev(&self) -> f64 {
        let n = (ROI_WINDOW * ROI_WINDOW) as f64;
        (self.score as f64).sqrt() / n
    }
}

/// Scores every `ROI_WINDOW`-sized window on the stride grid and returns them
/// ordered by decreasing standard deviation, then by `(y0, x0)`.
pub fn ranked_windows(grid: &IntensityGrid, stride: usize) -> Vec<ScoredWindow> {
    let (w, h) = (grid.width(), grid.height());
    if stride == 0 || w < ROI_WINDOW || h < ROI_WINDOW {
        return Vec::new();
    }
    let integral = IntegralImage::new(grid);
    let mut windows = Vec::new();
    for y0 in (0..=h - ROI_WINDOW).step_by(stride) {
        for x0 in (0..=w - ROI_WINDOW).step_by(stride) {
            windows.push(ScoredWindow {
                x0,
                y0,
                score: integral.scaled_variance(x0, y0, ROI_WINDOW, ROI_WINDOW),
            });
        }
    }
    windows.sort_by(|a, b| b.score.cmp(&a.score).then(a.y0.cmp(&b.y0)).then(a.x0.cmp(&b.x0)));
    windows
}

/// Sixteen pairwise-disjoint 100x100 windows of highest intensity standard
/// deviation, greedily accepted in score order.
pub fn roi16(grid: &IntensityGrid, stride: usize) -> Result<Vec<Patch>> {
    if stride == 0 {
        return Err(Error::Sampling("ROI stride must be positive".into()));
    }
    let mut accepted: Vec<(usize, usize)> = Vec::with_capacity(PATCHES_PER_IMAGE);
    for window in ranked_windows(grid, stride) {
        let rect = (window.x0, window.y0, ROI_WINDOW, ROI_WINDOW);
        if accepted
            .iter()
            .any(|&(x, y)| rects_overlap(rect, (x, y, ROI_WINDOW, ROI_WINDOW)))
        {
            continue;
        }
        accepted.push((window.x0, window.y0));
        if accepted.len() == PATCHES_PER_IMAGE {
            break;
        }
    }
    if accepted.len() < PATCHES_PER_IMAGE {
        return Err(Error::Sampling(format!(
            "only {} disjoint {ROI_WINDOW}x{ROI_WINDOW} windows fit in a {}x{} image at stride {stride}",
            accepted.len(),
            grid.width(),
            grid.height()
        )));
    }
    Ok(accepted
        .into_iter()
        .enumerate()
        .map(|(index, (x0, y0))| Patch {
            index,
            x0,
            y0,
            grid: grid.crop(x0, y0, ROI_WINDOW, ROI_WINDOW),
        })
        .collect())
}
