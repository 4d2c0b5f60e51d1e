//! The five subcommands. Each validates its whole configuration before doing
//! any work and writes every artifact atomically.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use styletree_core::{
    export_phylip, extract_dataset, neighbor_joining, normalize, run_experiment, scan_dataset, symmetrize,
    synth_dataset, to_newick, to_similarity, CategoryMatrix, Error, ExperimentReport, PhyloTree, Result, SynthSpec,
};

use crate::config::RunConfig;
use crate::output::{matrix_tsv, write_atomic, HeaderBlock};
use crate::store::{check_cell, read_store, write_store, StoreHeader};

pub const RUNS_FILE: &str = "runs.tsv";
pub const CONFUSION_FILE: &str = "confusion.tsv";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const SUMMARY_FILE: &str = "summary.tsv";
pub const M_FILE: &str = "M.tsv";
pub const D_FILE: &str = "D.tsv";
pub const S_FILE: &str = "S.tsv";
pub const TREE_DISTANCE_FILE: &str = "tree_distances.tsv";
pub const NEWICK_FILE: &str = "tree.nwk";
pub const PHYLIP_FILE: &str = "infile.phylip";
pub const TREE_META_FILE: &str = "tree.meta.tsv";

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractSummary {
    pub store: PathBuf,
    pub samples: usize,
    pub rows: usize,
}

pub fn extract(cfg: &RunConfig) -> Result<ExtractSummary> {
    let root = cfg.require_dataset()?;
    let manifest = scan_dataset(root, &cfg.bank_version)?;
    for s in &manifest.samples {
        check_cell("sample", &s.id)?;
        check_cell("category", &s.category)?;
    }
    info!(
        "extracting {} images in {} categories ({} mode)",
        manifest.samples.len(),
        manifest.categories.len(),
        cfg.mode
    );
    let table = extract_dataset(&manifest, cfg.mode)?;
    let store = cfg.store_path();
    write_store(&store, &StoreHeader::for_config(cfg), &table)?;
    let rows = table.samples.iter().map(|s| s.patches.len()).sum();
    info!("wrote {rows} rows to {}", store.display());
    Ok(ExtractSummary {
        store,
        samples: table.samples.len(),
        rows,
    })
}

/// Loads the store, checks it against the configuration and runs the
/// repeated train/test experiment.
pub fn experiment(cfg: &RunConfig) -> Result<(StoreHeader, ExperimentReport)> {
    let path = cfg.require_store()?;
    let (header, table) = read_store(&path)?;
    header
        .check_compatible(cfg)
        .map_err(|e| e.context(path.display().to_string()))?;
    info!(
        "running {} splits over {} samples in {} categories",
        cfg.runs,
        table.samples.len(),
        table.categories.len()
    );
    let report = run_experiment(&table, &cfg.experiment())?;
    Ok((header, report))
}

fn header(title: &str, cfg: &RunConfig, store: &StoreHeader) -> HeaderBlock {
    HeaderBlock::new(title)
        .with("tool_version", crate::VERSION)
        .with("bank_version", &store.bank_version)
        .with("mode", &store.mode)
        .with("stride", store.stride.map_or("none".to_string(), |s| s.to_string()))
        .with("seed", cfg.seed)
        .with("runs", cfg.runs)
        .with("train_n", cfg.train_n)
        .with("test_n", cfg.test_n)
}

pub fn evaluate(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (store, report) = experiment(cfg)?;
    let cats = &report.categories;

    let mut runs = header("styletree runs", cfg, &store).render();
    runs.push_str("run\timage_accuracy\ttile_accuracy\tcorrect\ttested\n");
    for r in &report.runs {
        let correct: usize = (0..cats.len()).map(|t| r.confusion[t][t]).sum();
        let tested: usize = r.confusion.iter().flatten().sum();
        let _ = writeln!(
            runs,
            "{}\t{}\t{}\t{correct}\t{tested}",
            r.run_index, r.image_accuracy, r.tile_accuracy
        );
    }

    let mut confusion = header("styletree confusion", cfg, &store).render();
    confusion.push_str("run\ttruth\tpredicted\tcount\n");
    let mut pooled = vec![vec![0usize; cats.len()]; cats.len()];
    for r in &report.runs {
        for (t, row) in r.confusion.iter().enumerate() {
            for (p, &n) in row.iter().enumerate() {
                pooled[t][p] += n;
                let _ = writeln!(confusion, "{}\t{}\t{}\t{n}", r.run_index, cats[t], cats[p]);
            }
        }
    }
    for (t, row) in pooled.iter().enumerate() {
        for (p, n) in row.iter().enumerate() {
            let _ = writeln!(confusion, "all\t{}\t{}\t{n}", cats[t], cats[p]);
        }
    }

    let mut predictions = header("styletree predictions", cfg, &store).render();
    predictions.push_str("run\tsample\ttruth\tpredicted");
    for c in cats {
        let _ = write!(predictions, "\tD_{c}");
    }
    predictions.push('\n');
    for r in &report.runs {
        for p in &r.predictions {
            let _ = write!(
                predictions,
                "{}\t{}\t{}\t{}",
                r.run_index, p.id, cats[p.truth], cats[p.predicted]
            );
            for d in &p.distances {
                let _ = write!(predictions, "\t{d}");
            }
            predictions.push('\n');
        }
    }

    let mut summary = header("styletree summary", cfg, &store).render();
    summary.push_str("metric\tvalue\n");
    for (k, v) in [
        ("categories", cats.len() as f64),
        ("mean_accuracy", report.mean_accuracy),
        ("stddev_accuracy", report.stddev_accuracy),
        ("pooled_accuracy", report.pooled_accuracy),
        ("mean_tile_accuracy", report.mean_tile_accuracy),
        ("chance", report.chance),
    ] {
        let _ = writeln!(summary, "{k}\t{v}");
    }

    write_atomic(&cfg.out.join(RUNS_FILE), &runs)?;
    write_atomic(&cfg.out.join(CONFUSION_FILE), &confusion)?;
    write_atomic(&cfg.out.join(PREDICTIONS_FILE), &predictions)?;
    write_atomic(&cfg.out.join(SUMMARY_FILE), &summary)?;
    info!(
        "mean accuracy {:.4} ± {:.4} (chance {:.4})",
        report.mean_accuracy, report.stddev_accuracy, report.chance
    );
    Ok(report)
}

/// Aggregate distance matrix plus its normalized and similarity forms.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityArtifacts {
    pub m: CategoryMatrix,
    pub d: CategoryMatrix,
    pub s: CategoryMatrix,
}

fn matrices(cfg: &RunConfig, report: &ExperimentReport) -> Result<SimilarityArtifacts> {
    let m = report.mean_matrix.clone();
    let d = normalize(&m, cfg.normalization)?;
    let s = to_similarity(&d);
    Ok(SimilarityArtifacts { m, d, s })
}

pub fn similarity(cfg: &RunConfig) -> Result<SimilarityArtifacts> {
    let (store, report) = experiment(cfg)?;
    let art = matrices(cfg, &report)?;
    let h = |title: &str| header(title, cfg, &store).with("normalization", cfg.normalization.tag());
    write_atomic(
        &cfg.out.join(M_FILE),
        &matrix_tsv(&h("styletree class distances M"), &art.m),
    )?;
    write_atomic(
        &cfg.out.join(D_FILE),
        &matrix_tsv(&h("styletree normalized distances D"), &art.d),
    )?;
    write_atomic(&cfg.out.join(S_FILE), &matrix_tsv(&h("styletree similarity S"), &art.s))?;
    Ok(art)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeArtifacts {
    pub distances: CategoryMatrix,
    pub tree: PhyloTree,
    pub newick: String,
    pub phylip: String,
}

/// Builds the tree for one class-distance matrix.
pub fn tree_from_matrix(m: &CategoryMatrix, cfg: &RunConfig) -> Result<TreeArtifacts> {
    let distances = symmetrize(&normalize(m, cfg.normalization)?);
    let tree = neighbor_joining(&distances)?;
    Ok(TreeArtifacts {
        newick: to_newick(&tree),
        phylip: export_phylip(&distances)?,
        distances,
        tree,
    })
}

pub fn tree(cfg: &RunConfig) -> Result<TreeArtifacts> {
    let (store, report) = experiment(cfg)?;
    let art = tree_from_matrix(&report.mean_matrix, cfg)?;
    let mut meta = header("styletree tree", cfg, &store).with("normalization", cfg.normalization.tag());
    if let Some((a, b)) = art.tree.closest_leaf_pair() {
        meta.push("closest_pair", format!("{},{}", art.tree.leaves[a], art.tree.leaves[b]));
    }
    write_atomic(
        &cfg.out.join(TREE_DISTANCE_FILE),
        &matrix_tsv(
            &meta.clone().with("matrix", "symmetrized normalized distances"),
            &art.distances,
        ),
    )?;
    write_atomic(&cfg.out.join(NEWICK_FILE), &art.newick)?;
    write_atomic(&cfg.out.join(PHYLIP_FILE), &art.phylip)?;
    write_atomic(&cfg.out.join(TREE_META_FILE), &meta.render_sidecar())?;
    info!("tree: {}", art.newick.trim_end());
    Ok(art)
}

pub fn synth(spec_path: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(spec_path).map_err(|e| Error::Io {
        path: spec_path.to_path_buf(),
        source: e,
    })?;
    let spec = SynthSpec::parse(&text).map_err(|e| e.context(spec_path.display().to_string()))?;
    spec.validate()?;
    let files = synth_dataset(&spec, out)?;
    info!("wrote {} images to {}", files.len(), out.display());
    Ok(files)
}
