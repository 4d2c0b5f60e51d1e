//! Argument definitions and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use styletree_core::Result;

use crate::commands;
use crate::config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "styletree",
    version,
    about = "Quantitative visual-style similarity between image sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample 16 patches per image and write the feature store.
    Extract(RunArgs),
    /// Repeated random train/test splits: accuracy and confusion reports.
    Evaluate(RunArgs),
    /// Class distance, normalized distance and similarity matrices.
    Similarity(RunArgs),
    /// Neighbor-joining tree of the categories (Newick and Phylip infile).
    Tree(RunArgs),
    /// Render a synthetic texture dataset from a spec file.
    Synth(SynthArgs),
}

/// Flags shared by the pipeline commands. Precedence: flag > config file > default.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset root with one sub-directory per category.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Patch sampling: tiles or roi.
    #[arg(long)]
    pub mode: Option<String>,
    /// Window stride in roi mode.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub train_n: Option<usize>,
    #[arg(long)]
    pub test_n: Option<usize>,
    #[arg(long)]
    pub bank_version: Option<String>,
    /// ratio-rescale or paper-literal.
    #[arg(long)]
    pub normalization: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Feature store path (default `<out>/features.tsv`).
    #[arg(long)]
    pub store: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let flags = Overrides {
            dataset: self.dataset.clone(),
            mode: self.mode.clone(),
            stride: self.stride,
            seed: self.seed,
            runs: self.runs,
            train_n: self.train_n,
            test_n: self.test_n,
            bank_version: self.bank_version.clone(),
            normalization: self.normalization.clone(),
            out: self.out.clone(),
            store: self.store.clone(),
        };
        RunConfig::resolve(self.config.as_deref(), flags)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthetic dataset spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Output dataset root.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Extract(a) => {
            let s = commands::extract(&a.resolve()?)?;
            println!("{}\t{} samples\t{} rows", s.store.display(), s.samples, s.rows);
        }
        Command::Evaluate(a) => {
            let r = commands::evaluate(&a.resolve()?)?;
            println!(
                "mean_accuracy={} stddev={} pooled={} chance={}",
                r.mean_accuracy, r.stddev_accuracy, r.pooled_accuracy, r.chance
            );
        }
        Command::Similarity(a) => {
            let cfg = a.resolve()?;
            commands::similarity(&cfg)?;
            println!("{}", cfg.out.display());
        }
        Command::Tree(a) => {
            let t = commands::tree(&a.resolve()?)?;
            print!("{}", t.newick);
        }
        Command::Synth(a) => {
            let files = commands::synth(&a.spec, &a.out)?;
            println!("{}\t{} images", a.out.display(), files.len());
        }
    }
    Ok(())
}
