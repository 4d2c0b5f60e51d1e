//! Patch sampling plus feature extraction over a whole dataset.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureBank;
use crate::raster::{load_image, DatasetManifest, IntensityGrid, SampleEntry};
use crate::sampler::SamplingMode;

#[derive(Clone, Debug, PartialEq)]
pub struct PatchFeatures {
    pub index: usize,
    pub x0: usize,
    pub y0: usize,
    pub values: Vec<f64>,
}

/// Feature vectors of every patch of one image.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleFeatures {
    pub id: String,
    pub category: String,
    pub patches: Vec<PatchFeatures>,
}

impl SampleFeatures {
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.patches.iter().map(|p| p.values.clone()).collect()
    }
}

/// Extracted features of a dataset, in manifest order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub bank_version: String,
    pub categories: Vec<String>,
    pub samples: Vec<SampleFeatures>,
}

impl FeatureTable {
    /// Builds a table, deriving the sorted category list from the samples.
    pub fn new(bank_version: impl Into<String>, samples: Vec<SampleFeatures>) -> Result<Self> {
        let bank_version = bank_version.into();
        let bank = FeatureBank::by_version(&bank_version)?;
        let mut categories: Vec<String> = samples.iter().map(|s| s.category.clone()).collect();
        categories.sort();
        categories.dedup();
        for s in &samples {
            if let Some(p) = s.patches.iter().find(|p| p.values.len() != bank.len()) {
                return Err(Error::Contract(format!(
                    "{} patch {}: {} values, bank {} has {}",
                    s.id,
                    p.index,
                    p.values.len(),
                    bank_version,
                    bank.len()
                )));
            }
        }
        Ok(FeatureTable {
            bank_version,
            categories,
            samples,
        })
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.binary_search_by(|c| c.as_str().cmp(name)).ok()
    }
}

pub fn extract_grid(grid: &IntensityGrid, mode: SamplingMode, bank: &FeatureBank) -> Result<Vec<PatchFeatures>> {
    Ok(mode
        .sample(grid)?
        .into_iter()
        .map(|p| PatchFeatures {
            index: p.index,
            x0: p.x0,
            y0: p.y0,
            values: bank.extract(&p.grid).values,
        })
        .collect())
}

pub fn extract_sample(entry: &SampleEntry, mode: SamplingMode, bank: &FeatureBank) -> Result<SampleFeatures> {
    let grid = load_image(&entry.path)?;
    let patches = extract_grid(&grid, mode, bank).map_err(|e| e.context(entry.path.display().to_string()))?;
    Ok(SampleFeatures {
        id: entry.id.clone(),
        category: entry.category.clone(),
        patches,
    })
}

/// Extracts every sample in parallel on the current rayon pool. Output order
/// and values do not depend on the number of threads.
pub fn extract_dataset(manifest: &DatasetManifest, mode: SamplingMode) -> Result<FeatureTable> {
    let bank = FeatureBank::by_version(&manifest.bank_version)?;
    let samples = manifest
        .samples
        .par_iter()
        .map(|entry| extract_sample(entry, mode, bank))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable {
        bank_version: manifest.bank_version.clone(),
        categories: manifest.categories.clone(),
        samples,
    })
}
