//! The versioned feature bank.
//!
//! Bank `v1` computes every family on the raw intensity plane, then the
//! intensity statistics, multiscale histograms, Haralick and Chebyshev
//! families again on the log-magnitude Fourier plane: 169 + 87 = 256 values.
//! All features are computed on the grayscale plane only.

pub mod chebyshev;
pub mod edges;
pub mod fractal;
pub mod gabor;
pub mod haralick;
pub mod plane;
pub mod spectrum;
pub mod stats;
pub mod tamura;
pub mod zernike;

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::raster::IntensityGrid;
pub use plane::Plane;

pub const BANK_V1: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    IntensityStats,
    MultiscaleHistogram,
    Haralick,
    Zernike,
    EdgeStats,
    Tamura,
    Gabor,
    Fractal,
    Chebyshev,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::IntensityStats => "intensity",
            Family::MultiscaleHistogram => "histogram",
            Family::Haralick => "haralick",
            Family::Zernike => "zernike",
            Family::EdgeStats => "edge",
            Family::Tamura => "tamura",
            Family::Gabor => "gabor",
            Family::Fractal => "fractal",
            Family::Chebyshev => "chebyshev",
        }
    }

    fn names(&self) -> Vec<String> {
        match self {
            Family::IntensityStats => stats::INTENSITY_STATS.iter().map(|s| s.to_string()).collect(),
            Family::MultiscaleHistogram => stats::histogram_names(),
            Family::Haralick => haralick::names(),
            Family::Zernike => zernike::names(),
            Family::EdgeStats => edges::names(),
            Family::Tamura => tamura::NAMES.iter().map(|s| s.to_string()).collect(),
            Family::Gabor => gabor::names(),
            Family::Fractal => fractal::names(),
            Family::Chebyshev => chebyshev::names(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlaneKind {
    Raw,
    FftMagnitude,
}

impl PlaneKind {
    pub fn tag(&self) -> &'static str {
        match self {
            PlaneKind::Raw => "raw",
            PlaneKind::FftMagnitude => "fft",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BankDescriptor {
    pub index: usize,
    pub family: Family,
    pub plane: PlaneKind,
    pub name: String,
}

impl BankDescriptor {
    /// Stable `family.plane.name` identifier, used as a column header.
    pub fn qualified_name(&self) -> String {
        format!("{}.{}.{}", self.family.tag(), self.plane.tag(), self.name)
    }
}

const RAW_FAMILIES: [Family; 9] = [
    Family::IntensityStats,
    Family::MultiscaleHistogram,
    Family::Haralick,
    Family::Zernike,
    Family::EdgeStats,
    Family::Tamura,
    Family::Gabor,
    Family::Fractal,
    Family::Chebyshev,
];

const FFT_FAMILIES: [Family; 4] = [
    Family::IntensityStats,
    Family::MultiscaleHistogram,
    Family::Haralick,
    Family::Chebyshev,
];

/// Ordered descriptor values for one patch.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub bank_version: &'static str,
    pub values: Vec<f64>,
}

#[derive(Debug)]
pub struct FeatureBank {
    version: &'static str,
    descriptors: Vec<BankDescriptor>,
}

impl FeatureBank {
    pub fn v1() -> &'static FeatureBank {
        static V1: OnceLock<FeatureBank> = OnceLock::new();
        V1.get_or_init(|| {
            let mut descriptors = Vec::new();
            let layout = RAW_FAMILIES
                .iter()
                .map(|&f| (f, PlaneKind::Raw))
                .chain(FFT_FAMILIES.iter().map(|&f| (f, PlaneKind::FftMagnitude)));
            for (family, plane) in layout {
                for name in family.names() {
                    descriptors.push(BankDescriptor {
                        index: descriptors.len(),
                        family,
                        plane,
                        name,
                    });
                }
            }
            FeatureBank {
                version: BANK_V1,
                descriptors,
            }
        })
    }

    pub fn by_version(version: &str) -> Result<&'static FeatureBank> {
        match version {
            BANK_V1 => Ok(Self::v1()),
            other => Err(Error::Config(format!("unknown feature bank version '{other}'"))),
        }
    }

    pub fn version(&self) -> &'static str {
        self.version
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[BankDescriptor] {
        &self.descriptors
    }

    pub fn column_names(&self) -> Vec<String> {
        self.descriptors.iter().map(|d| d.qualified_name()).collect()
    }

    pub fn extract(&self, patch: &IntensityGrid) -> FeatureVector {
        let raw = Plane::from_grid(patch);
        let mut values = Vec::with_capacity(self.len());
        if raw.is_empty() {
            values.resize(self.len(), 0.0);
            return FeatureVector {
                bank_version: self.version,
                values,
            };
        }

        let spectrum = spectrum::fft2(&raw);
        let fft_plane = spectrum::log_magnitude_plane(&spectrum, raw.width, raw.height);

        for family in RAW_FAMILIES {
            match family {
                Family::Gabor => values.extend(gabor::gabor(&spectrum, raw.width, raw.height)),
                _ => values.extend(plane_family(family, &raw)),
            }
        }
        for family in FFT_FAMILIES {
            values.extend(plane_family(family, &fft_plane));
        }
        debug_assert_eq!(values.len(), self.len());
        for v in &mut values {
            debug_assert!(v.is_finite());
            if !v.is_finite() {
                *v = 0.0;
            }
        }
        FeatureVector {
            bank_version: self.version,
            values,
        }
    }
}

fn plane_family(family: Family, plane: &Plane) -> Vec<f64> {
    match family {
        Family::IntensityStats => stats::intensity_stats(plane).to_vec(),
        Family::MultiscaleHistogram => stats::multiscale_histogram(plane),
        Family::Haralick => haralick::haralick(plane),
        Family::Zernike => zernike::zernike(plane),
        Family::EdgeStats => edges::edge_stats(plane),
        Family::Tamura => tamura::tamura(plane),
        Family::Gabor => gabor::gabor(&spectrum::fft2(plane), plane.width, plane.height),
        Family::Fractal => fractal::fractal(plane),
        Family::Chebyshev => chebyshev::chebyshev(plane),
    }
}

impl fmt::Display for FeatureBank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bank {} ({} descriptors)", self.version, self.len())
    }
}

/// Descriptor count of a bank version.
pub fn bank_size(version: &str) -> Result<usize> {
    FeatureBank::by_version(version).map(FeatureBank::len)
}

pub fn extract(patch: &IntensityGrid) -> FeatureVector {
    FeatureBank::v1().extract(patch)
}
