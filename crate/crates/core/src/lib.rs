//! Quantitative visual-style comparison of labelled image sets.
//!
//! Images are cut into 16 patches (a 4x4 tile grid or 16 high-variance
//! regions of interest), every patch is described by a fixed bank of
//! texture, moment, fractal and transform descriptors, and images are
//! classified with a Fisher-weighted nearest-distance rule. Image-to-class
//! distances aggregate into a class-to-class matrix that is normalised into
//! a similarity matrix and summarised as a neighbor-joining tree.

// index loops read better than iterator chains over square matrices
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod phylo;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod sampler;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{make_splits, run_experiment, ExperimentConfig, ExperimentReport, RunReport, SplitPlan};
pub use features::{bank_size, extract, BankDescriptor, FeatureBank, FeatureVector};
pub use model::{LabeledImage, TrainedModel};
pub use phylo::{export_phylip, neighbor_joining, to_newick, PhyloTree};
pub use pipeline::{extract_dataset, FeatureTable, PatchFeatures, SampleFeatures};
pub use raster::{load_image, scan_dataset, DatasetManifest, IntensityGrid};
pub use sampler::{roi16, tile16, Patch, SamplingMode};
pub use similarity::{build_matrix, normalize, symmetrize, to_similarity, CategoryMatrix, Normalization};
pub use synth::{synth_dataset, SynthSpec, Texture};
