//! Image loading and dataset discovery.
//!
//! Every image is reduced to a single 8-bit intensity plane. Colour inputs
//! use Rec.601 luma with round-half-up, 16-bit inputs are scaled down by
//! integer division by 257, and alpha is dropped.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat, ImageReader};
use log::warn;

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntensityGrid {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl IntensityGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Contract(format!(
                "grid {}x{} needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        Ok(IntensityGrid { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        IntensityGrid {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Copies the rectangle `[x0, x0+w) x [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> IntensityGrid {
        debug_assert!(x0 + w <= self.width && y0 + h <= self.height);
        let mut pixels = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let start = y * self.width + x0;
            pixels.extend_from_slice(&self.pixels[start..start + w]);
        }
        IntensityGrid {
            width: w,
            height: h,
            pixels,
        }
    }

    /// The grid rotated by 90 degrees counter-clockwise.
    pub fn rotated_90(&self) -> IntensityGrid {
        let (w, h) = (self.width, self.height);
        let mut pixels = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                // (x, y) -> (y, w - 1 - x) in a grid of width h
                pixels[(w - 1 - x) * h + y] = self.pixels[y * w + x];
            }
        }
        IntensityGrid {
            width: h,
            height: w,
            pixels,
        }
    }

    pub fn transposed(&self) -> IntensityGrid {
        let (w, h) = (self.width, self.height);
        let mut pixels = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                pixels[x * h + y] = self.pixels[y * w + x];
            }
        }
        IntensityGrid {
            width: h,
            height: w,
            pixels,
        }
    }
}

/// Rec.601 luma, rounded half up, in exact integer arithmetic.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

#[inline]
fn narrow16(v: u16) -> u8 {
    (v / 257) as u8
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "pgm", "ppm"];

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Loads a PNG or binary PGM/PPM file as an intensity grid.
pub fn load_image(path: impl AsRef<Path>) -> Result<IntensityGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes, path)
}

/// Decodes in-memory image bytes; `path` is only used in error messages.
pub fn decode_image(bytes: &[u8], path: &Path) -> Result<IntensityGrid> {
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let reader = ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => return Err(format_err(format!("{other:?} is not supported"))),
        None => return Err(format_err("unrecognised image format".into())),
    }
    let img = reader.decode().map_err(|e| format_err(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);

    let pixels: Vec<u8> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.into_raw().chunks_exact(2).map(|p| p[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf.into_raw().chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.into_raw().chunks_exact(4).map(|p| luma(p[0], p[1], p[2])).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(narrow16).collect(),
        DynamicImage::ImageLumaA16(buf) => buf.into_raw().chunks_exact(2).map(|p| narrow16(p[0])).collect(),
        DynamicImage::ImageRgb16(buf) => buf
            .into_raw()
            .chunks_exact(3)
            .map(|p| luma(narrow16(p[0]), narrow16(p[1]), narrow16(p[2])))
            .collect(),
        DynamicImage::ImageRgba16(buf) => buf
            .into_raw()
            .chunks_exact(4)
            .map(|p| luma(narrow16(p[0]), narrow16(p[1]), narrow16(p[2])))
            .collect(),
        other => return Err(format_err(format!("pixel layout {:?} is not supported", other.color()))),
    };
    IntensityGrid::new(w, h, pixels)
}

/// One labelled image in a dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleEntry {
    /// Identifier relative to the dataset root, `<category>/<file>`.
    pub id: String,
    pub path: PathBuf,
    pub category: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    /// Lexicographically sorted; the global tie-break order.
    pub categories: Vec<String>,
    /// Sorted by (category, file name).
    pub samples: Vec<SampleEntry>,
    pub bank_version: String,
}

impl DatasetManifest {
    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.binary_search_by(|c| c.as_str().cmp(name)).ok()
    }

    pub fn samples_of<'a>(&'a self, category: &'a str) -> impl Iterator<Item = &'a SampleEntry> {
        self.samples.iter().filter(move |s| s.category == category)
    }
}

/// Discovers `<root>/<category>/<image>` files.
pub fn scan_dataset(root: impl AsRef<Path>, bank_version: &str) -> Result<DatasetManifest> {
    let root = root.as_ref();
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;

    let mut category_dirs: Vec<(String, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if !path.is_dir() {
            warn!("ignoring non-directory {}", path.display());
            continue;
        }
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            warn!("ignoring directory with non-UTF-8 name {}", path.display());
            continue;
        };
        if name.starts_with('.') {
            continue;
        }
        category_dirs.push((name.to_string(), path));
    }
    if category_dirs.is_empty() {
        return Err(Error::Dataset(format!(
            "{} contains no category directories",
            root.display()
        )));
    }
    category_dirs.sort();

    let mut categories = Vec::with_capacity(category_dirs.len());
    let mut samples = Vec::new();
    for (name, dir) in category_dirs {
        let mut files: Vec<(String, PathBuf)> = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let path = entry.path();
            if !path.is_file() {
                continue;
            }
            if !has_image_extension(&path) {
                warn!("ignoring non-image file {}", path.display());
                continue;
            }
            let Some(file_name) = path.file_name().and_then(|n| n.to_str()) else {
                warn!("ignoring file with non-UTF-8 name {}", path.display());
                continue;
            };
            files.push((file_name.to_string(), path));
        }
        if files.is_empty() {
            return Err(Error::Dataset(format!(
                "category '{name}' ({}) contains no images",
                dir.display()
            )));
        }
        files.sort();
        samples.extend(files.into_iter().map(|(file_name, path)| SampleEntry {
            id: format!("{name}/{file_name}"),
            path,
            category: name.clone(),
        }));
        categories.push(name);
    }

    Ok(DatasetManifest {
        root: root.to_path_buf(),
        categories,
        samples,
        bank_version: bank_version.to_string(),
    })
}
