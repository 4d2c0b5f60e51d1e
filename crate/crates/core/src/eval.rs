//! Repeated random train/test experiments.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{argmin, LabeledImage, TrainedModel};
use crate::pipeline::FeatureTable;
use crate::rng::{mix64, SplitMix64};
use crate::sampler::PATCHES_PER_IMAGE;
use crate::similarity::{build_matrix, CategoryMatrix, ImageDistances};

pub const DEFAULT_RUNS: usize = 20;
pub const DEFAULT_TRAIN_N: usize = 45;
pub const DEFAULT_TEST_N: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub runs: usize,
    pub train_n: usize,
    pub test_n: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            runs: DEFAULT_RUNS,
            train_n: DEFAULT_TRAIN_N,
            test_n: DEFAULT_TEST_N,
        }
    }
}

/// Train and test sample ids of one run, per category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPlan {
    pub seed: u64,
    pub run_index: usize,
    pub train: Vec<Vec<String>>,
    pub test: Vec<Vec<String>>,
}

/// Seed of the random stream for one run.
pub fn run_seed(seed: u64, run_index: usize) -> u64 {
    mix64(seed ^ mix64(run_index as u64 + 1))
}

/// One plan per run. For each run a SplitMix64 stream is seeded with
/// [`run_seed`]; each category's sorted id list is then Fisher-Yates
/// shuffled from that stream, in category order, and the first `train_n`
/// ids train while the next `test_n` test.
///
/// `ids_by_category[c]` lists the sample ids of category `c`, in any order.
pub fn make_splits(
    categories: &[String],
    ids_by_category: &[Vec<String>],
    config: &ExperimentConfig,
) -> Result<Vec<SplitPlan>> {
    if categories.len() != ids_by_category.len() {
        return Err(Error::Contract("one id list per category is required".into()));
    }
    let needed = config.train_n + config.test_n;
    for (name, ids) in categories.iter().zip(ids_by_category) {
        if ids.len() < needed {
            return Err(Error::Evaluation(format!(
                "category '{name}' has {} samples, {} train + {} test requested",
                ids.len(),
                config.train_n,
                config.test_n
            )));
        }
    }
    let sorted: Vec<Vec<String>> = ids_by_category
        .iter()
        .map(|ids| {
            let mut ids = ids.clone();
            ids.sort();
            ids
        })
        .collect();

    Ok((0..config.runs)
        .map(|run_index| {
            let mut rng = SplitMix64::new(run_seed(config.seed, run_index));
            let mut train = Vec::with_capacity(sorted.len());
            let mut test = Vec::with_capacity(sorted.len());
            for ids in &sorted {
                let mut ids = ids.clone();
                rng.shuffle(&mut ids);
                test.push(ids[config.train_n..needed].to_vec());
                ids.truncate(config.train_n);
                train.push(ids);
            }
            SplitPlan {
                seed: config.seed,
                run_index,
                train,
                test,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestPrediction {
    pub id: String,
    pub truth: usize,
    pub predicted: usize,
    pub distances: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub run_index: usize,
    pub image_accuracy: f64,
    /// Fraction of test patches whose own nearest category is correct.
    pub tile_accuracy: f64,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Class-to-class distances over this run's test images.
    pub matrix: CategoryMatrix,
    pub predictions: Vec<TestPrediction>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub categories: Vec<String>,
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over runs; 0 for a single run.
    pub stddev_accuracy: f64,
    /// Correct predictions over all runs divided by all predictions.
    pub pooled_accuracy: f64,
    pub mean_tile_accuracy: f64,
    pub chance: f64,
    /// Elementwise mean of the per-run matrices.
    pub mean_matrix: CategoryMatrix,
}

/// Checks that no training vector of `model` came from a test image.
pub fn audit_leakage(model: &TrainedModel, plan: &SplitPlan) -> Result<()> {
    let test: HashSet<&str> = plan.test.iter().flatten().map(String::as_str).collect();
    if let Some(id) = model.sources().iter().flatten().find(|id| test.contains(id.as_str())) {
        return Err(Error::Evaluation(format!(
            "run {}: test image {id} contributed to training",
            plan.run_index
        )));
    }
    Ok(())
}

pub fn run_split(table: &FeatureTable, plan: &SplitPlan) -> Result<RunReport> {
    let index: HashMap<&str, usize> = table
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i))
        .collect();
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Evaluation(format!("sample {id} is not in the feature table")))
    };

    let vectors: HashMap<usize, Vec<Vec<f64>>> = plan
        .train
        .iter()
        .chain(&plan.test)
        .flatten()
        .map(|id| lookup(id).map(|i| (i, table.samples[i].vectors())))
        .collect::<Result<_>>()?;

    let mut training = Vec::new();
    for (category, ids) in plan.train.iter().enumerate() {
        for id in ids {
            let i = lookup(id)?;
            training.push(LabeledImage {
                id: &table.samples[i].id,
                category,
                patches: &vectors[&i],
            });
        }
    }
    let model = TrainedModel::train(table.categories.clone(), &training, PATCHES_PER_IMAGE)?;
    audit_leakage(&model, plan)?;

    let n = table.categories.len();
    let mut confusion = vec![vec![0usize; n]; n];
    let mut predictions = Vec::new();
    let mut image_distances = Vec::new();
    let (mut tiles_right, mut tiles_total) = (0usize, 0usize);
    for (truth, ids) in plan.test.iter().enumerate() {
        for id in ids {
            let i = lookup(id)?;
            let projected = vectors[&i]
                .iter()
                .map(|p| model.project(p))
                .collect::<Result<Vec<_>>>()?;
            let distances = model.image_distances(&projected)?;
            let predicted = argmin(&distances);
            for p in &projected {
                tiles_total += 1;
                if model.predict_patch(p)? == truth {
                    tiles_right += 1;
                }
            }
            confusion[truth][predicted] += 1;
            image_distances.push(ImageDistances {
                category: truth,
                distances: distances.clone(),
            });
            predictions.push(TestPrediction {
                id: id.clone(),
                truth,
                predicted,
                distances,
            });
        }
    }
    let correct: usize = (0..n).map(|c| confusion[c][c]).sum();
    let matrix = build_matrix(&table.categories, &image_distances)?;
    Ok(RunReport {
        run_index: plan.run_index,
        image_accuracy: correct as f64 / predictions.len() as f64,
        tile_accuracy: tiles_right as f64 / tiles_total as f64,
        confusion,
        matrix,
        predictions,
    })
}

/// Splits, trains and tests every run (in parallel), then aggregates.
pub fn run_experiment(table: &FeatureTable, config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.runs == 0 || config.train_n < 1 || config.test_n < 1 {
        return Err(Error::Config("runs, train_n and test_n must all be positive".into()));
    }
    if table.categories.len() < 2 {
        return Err(Error::Evaluation("at least 2 categories are required".into()));
    }
    if let Some(s) = table.samples.iter().find(|s| s.patches.len() != PATCHES_PER_IMAGE) {
        return Err(Error::Evaluation(format!(
            "{} has {} patches, expected {PATCHES_PER_IMAGE}",
            s.id,
            s.patches.len()
        )));
    }
    let mut ids_by_category = vec![Vec::new(); table.categories.len()];
    for s in &table.samples {
        let c = table
            .category_index(&s.category)
            .ok_or_else(|| Error::Contract(format!("{}: unknown category", s.id)))?;
        ids_by_category[c].push(s.id.clone());
    }
    let plans = make_splits(&table.categories, &ids_by_category, config)?;
    let runs = plans
        .par_iter()
        .map(|plan| run_split(table, plan).map_err(|e| e.context(format!("run {}", plan.run_index))))
        .collect::<Result<Vec<_>>>()?;
    aggregate(table.categories.clone(), *config, runs)
}

pub fn aggregate(categories: Vec<String>, config: ExperimentConfig, runs: Vec<RunReport>) -> Result<ExperimentReport> {
    let k = runs.len() as f64;
    let accuracies: Vec<f64> = runs.iter().map(|r| r.image_accuracy).collect();
    let mean_accuracy = accuracies.iter().sum::<f64>() / k;
    let stddev_accuracy = if runs.len() > 1 {
        (accuracies.iter().map(|a| (a - mean_accuracy).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let (mut correct, mut total) = (0usize, 0usize);
    for r in &runs {
        for (t, row) in r.confusion.iter().enumerate() {
            correct += row[t];
            total += row.iter().sum::<usize>();
        }
    }
    let matrices: Vec<CategoryMatrix> = runs.iter().map(|r| r.matrix.clone()).collect();
    Ok(ExperimentReport {
        chance: 1.0 / categories.len() as f64,
        categories,
        config,
        mean_accuracy,
        stddev_accuracy,
        pooled_accuracy: correct as f64 / total as f64,
        mean_tile_accuracy: runs.iter().map(|r| r.tile_accuracy).sum::<f64>() / k,
        mean_matrix: CategoryMatrix::mean_of(&matrices)?,
        runs,
    })
}
