//! Deterministic synthetic texture datasets for end-to-end checks.
//!
//! Spec file format, one directive per line (`#` starts a comment):
//!
//! ```text
//! images = 50
//! width = 500
//! height = 500
//! seed = 7
//! coverage = 1.0
//! category stripes_coarse stripes 0.05
//! category stripes_fine stripes 0.25
//! category checker checker 16
//! ```
//!
//! `coverage` is the fraction of the image area covered by the texture (a
//! square at a random position); the rest is flat mid-gray. Every pixel
//! then receives Gaussian noise with standard deviation 8.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::raster::IntensityGrid;
use crate::rng::{fnv1a, mix64};

pub const NOISE_SIGMA: f64 = 8.0;
const MID_GRAY: f64 = 128.0;
const TEXTURE_AMPLITUDE: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Texture {
    /// Vertical sinusoidal stripes; spatial frequency in cycles/pixel.
    Stripes { frequency: f64 },
    /// Checkerboard with square cells of the given side.
    Checker { cell: usize },
    /// Independent uniform noise of the given half-range around mid-gray.
    Noise { amplitude: f64 },
}

impl Texture {
    pub fn parse(family: &str, parameter: &str) -> Result<Self> {
        let number = |what: &str| -> Result<f64> {
            parameter
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| Error::Config(format!("{family}: {what} must be a positive number, got '{parameter}'")))
        };
        match family {
            "stripes" => Ok(Texture::Stripes {
                frequency: number("frequency")?,
            }),
            "checker" => parameter
                .parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .map(|cell| Texture::Checker { cell })
                .ok_or_else(|| Error::Config(format!("checker: cell must be a positive integer, got '{parameter}'"))),
            "noise" => Ok(Texture::Noise {
                amplitude: number("amplitude")?,
            }),
            other => Err(Error::Config(format!(
                "unknown texture family '{other}' (expected stripes, checker or noise)"
            ))),
        }
    }
}

impl fmt::Display for Texture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Texture::Stripes { frequency } => write!(f, "stripes {frequency}"),
            Texture::Checker { cell } => write!(f, "checker {cell}"),
            Texture::Noise { amplitude } => write!(f, "noise {amplitude}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCategory {
    pub name: String,
    pub texture: Texture,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub categories: Vec<SynthCategory>,
    pub images_per_category: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub coverage: f64,
}

impl SynthSpec {
    pub fn new(categories: Vec<SynthCategory>, images_per_category: usize, size: usize, seed: u64) -> Self {
        SynthSpec {
            categories,
            images_per_category,
            width: size,
            height: size,
            seed,
            coverage: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::Config("synthetic spec has no categories".into()));
        }
        let mut names: Vec<&str> = self.categories.iter().map(|c| c.name.as_str()).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate category name '{}'", w[0])));
        }
        if let Some(c) = self
            .categories
            .iter()
            .find(|c| c.name.is_empty() || c.name.starts_with('.') || c.name.contains(['/', '\\']))
        {
            return Err(Error::Config(format!("'{}' is not usable as a directory name", c.name)));
        }
        if self.width < 400 || self.height < 400 {
            return Err(Error::Config(format!(
                "synthetic images must be at least 400x400, got {}x{}",
                self.width, self.height
            )));
        }
        if self.images_per_category == 0 {
            return Err(Error::Config("images per category must be positive".into()));
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return Err(Error::Config(format!(
                "coverage must be in (0, 1], got {}",
                self.coverage
            )));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SynthSpec::new(Vec::new(), 50, 500, 0);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Config(format!("synthetic spec line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix("category") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(bad("expected 'category <name> <family> <parameter>'".into()));
                }
                spec.categories.push(SynthCategory {
                    name: parts[0].to_string(),
                    texture: Texture::parse(parts[1], parts[2]).map_err(|e| bad(e.to_string()))?,
                });
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("cannot parse '{line}'")))?;
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|_| bad(format!("{key} must be an integer")))
            };
            match key {
                "images" => spec.images_per_category = int()?,
                "size" => {
                    spec.width = int()?;
                    spec.height = spec.width;
                }
                "width" => spec.width = int()?,
                "height" => spec.height = int()?,
                "seed" => spec.seed = value.parse().map_err(|_| bad("seed must be an integer".into()))?,
                "coverage" => spec.coverage = value.parse().map_err(|_| bad("coverage must be a number".into()))?,
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "images = {}\nwidth = {}\nheight = {}\nseed = {}\ncoverage = {}\n",
            self.images_per_category, self.width, self.height, self.seed, self.coverage
        );
        for c in &self.categories {
            out.push_str(&format!("category {} {}\n", c.name, c.texture));
        }
        out
    }

    fn image_seed(&self, category: &SynthCategory, index: usize) -> u64 {
        mix64(self.seed ^ mix64(fnv1a(category.name.as_bytes())) ^ mix64(index as u64).rotate_left(17))
    }
}

/// Renders image `index` of `category`.
pub fn render_image(spec: &SynthSpec, category: &SynthCategory, index: usize) -> IntensityGrid {
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.image_seed(category, index));

    let (rx, ry, rw, rh) = if spec.coverage >= 1.0 {
        (0, 0, w, h)
    } else {
        let side = ((spec.coverage.sqrt() * w.min(h) as f64).round() as usize).clamp(1, w.min(h));
        (
            rng.random_range(0..=w - side),
            rng.random_range(0..=h - side),
            side,
            side,
        )
    };

    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let (ox, oy) = match category.texture {
        Texture::Checker { cell } => (rng.random_range(0..2 * cell), rng.random_range(0..2 * cell)),
        _ => (0, 0),
    };

    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
    let mut grid = IntensityGrid::filled(w, h, 0);
    for y in 0..h {
        for x in 0..w {
            let inside = x >= rx && x < rx + rw && y >= ry && y < ry + rh;
            let base = if !inside {
                MID_GRAY
            } else {
                match category.texture {
                    Texture::Stripes { frequency } => {
                        MID_GRAY + TEXTURE_AMPLITUDE * (std::f64::consts::TAU * frequency * x as f64 + phase).sin()
                    }
                    Texture::Checker { cell } => {
                        if ((x + ox) / cell + (y + oy) / cell) % 2 == 0 {
                            MID_GRAY - TEXTURE_AMPLITUDE
                        } else {
                            MID_GRAY + TEXTURE_AMPLITUDE
                        }
                    }
                    Texture::Noise { amplitude } => MID_GRAY + rng.random_range(-amplitude..=amplitude),
                }
            };
            let v = base + noise.sample(&mut rng);
            grid.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    grid
}

/// Binary PGM (P5) encoding.
pub fn encode_pgm(grid: &IntensityGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    out.extend_from_slice(grid.pixels());
    out
}

pub fn write_pgm(grid: &IntensityGrid, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode_pgm(grid)).map_err(|e| Error::io(path, e))
}

/// Writes `<out>/<category>/<category>_<NNN>.pgm` for every image and
/// returns the written paths in order.
pub fn synth_dataset(spec: &SynthSpec, out: &Path) -> Result<Vec<PathBuf>> {
    spec.validate()?;
    let mut written = Vec::new();
    for category in &spec.categories {
        let dir = out.join(&category.name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let paths: Vec<PathBuf> = (0..spec.images_per_category)
            .map(|i| dir.join(format!("{}_{i:03}.pgm", category.name)))
            .collect();
        use rayon::prelude::*;
        paths
            .par_iter()
            .enumerate()
            .try_for_each(|(i, path)| write_pgm(&render_image(spec, category, i), path))?;
        written.extend(paths);
    }
    Ok(written)
}
