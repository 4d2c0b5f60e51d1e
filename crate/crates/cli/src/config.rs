//! Run configuration: built-in defaults, overridden by a `key = value` file,
//! overridden in turn by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use styletree_core::eval::{DEFAULT_RUNS, DEFAULT_TEST_N, DEFAULT_TRAIN_N};
use styletree_core::sampler::DEFAULT_ROI_STRIDE;
use styletree_core::{Error, FeatureBank, Normalization, Result, SamplingMode};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_BANK: &str = "v1";
pub const DEFAULT_OUT: &str = "styletree-out";
pub const STORE_FILE: &str = "features.tsv";

/// Recognised keys of the configuration file, in documentation order.
pub const KEYS: &[&str] = &[
    "dataset",
    "mode",
    "stride",
    "seed",
    "runs",
    "train_n",
    "test_n",
    "bank_version",
    "normalization",
    "out",
    "store",
];

/// Partially specified configuration; one layer of the precedence stack.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub mode: Option<String>,
    pub stride: Option<usize>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub train_n: Option<usize>,
    pub test_n: Option<usize>,
    pub bank_version: Option<String>,
    pub normalization: Option<String>,
    pub out: Option<PathBuf>,
    pub store: Option<PathBuf>,
}

impl Overrides {
    /// Parses a flat `key = value` file. Blank lines and `#` comments are
    /// skipped; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            seen.push(key);
            o.set(key, value)
                .map_err(|e| e.context(format!("line {}", lineno + 1)))?;
        }
        Ok(o)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Overrides::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => self.dataset = Some(value.into()),
            "mode" => self.mode = Some(value.into()),
            "stride" => self.stride = Some(number(key, value)?),
            "seed" => self.seed = Some(number(key, value)?),
            "runs" => self.runs = Some(number(key, value)?),
            "train_n" => self.train_n = Some(number(key, value)?),
            "test_n" => self.test_n = Some(number(key, value)?),
            "bank_version" => self.bank_version = Some(value.into()),
            "normalization" => self.normalization = Some(value.into()),
            "out" => self.out = Some(value.into()),
            "store" => self.store = Some(value.into()),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Layers `top` over `self`: any value set in `top` wins.
    pub fn overlay(self, top: Overrides) -> Overrides {
        Overrides {
            dataset: top.dataset.or(self.dataset),
            mode: top.mode.or(self.mode),
            stride: top.stride.or(self.stride),
            seed: top.seed.or(self.seed),
            runs: top.runs.or(self.runs),
            train_n: top.train_n.or(self.train_n),
            test_n: top.test_n.or(self.test_n),
            bank_version: top.bank_version.or(self.bank_version),
            normalization: top.normalization.or(self.normalization),
            out: top.out.or(self.out),
            store: top.store.or(self.store),
        }
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{value}' is not a non-negative integer")))
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub mode: SamplingMode,
    pub seed: u64,
    pub runs: usize,
    pub train_n: usize,
    pub test_n: usize,
    pub bank_version: String,
    pub normalization: Normalization,
    pub out: PathBuf,
    store: Option<PathBuf>,
}

impl RunConfig {
    /// Resolves defaults < config file < flags and validates every value.
    pub fn resolve(config_file: Option<&Path>, flags: Overrides) -> Result<Self> {
        let file = match config_file {
            Some(path) => Overrides::load(path)?,
            None => Overrides::default(),
        };
        RunConfig::from_overrides(file.overlay(flags))
    }

    pub fn from_overrides(o: Overrides) -> Result<Self> {
        let stride = o.stride.unwrap_or(DEFAULT_ROI_STRIDE);
        if stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        let mode = match o.mode.as_deref().unwrap_or("tiles") {
            "tiles" => SamplingMode::Tiles16,
            "roi" => SamplingMode::Roi16 { stride },
            other => return Err(Error::Config(format!("mode: expected tiles or roi, got '{other}'"))),
        };
        let bank_version = o.bank_version.unwrap_or_else(|| DEFAULT_BANK.to_string());
        FeatureBank::by_version(&bank_version)?;
        let normalization = match o.normalization {
            Some(s) => s.parse()?,
            None => Normalization::default(),
        };
        let cfg = RunConfig {
            dataset: o.dataset,
            mode,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            runs: o.runs.unwrap_or(DEFAULT_RUNS),
            train_n: o.train_n.unwrap_or(DEFAULT_TRAIN_N),
            test_n: o.test_n.unwrap_or(DEFAULT_TEST_N),
            bank_version,
            normalization,
            out: o.out.unwrap_or_else(|| DEFAULT_OUT.into()),
            store: o.store,
        };
        for (name, v) in [("runs", cfg.runs), ("train_n", cfg.train_n), ("test_n", cfg.test_n)] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(cfg)
    }

    /// Store location: explicit `store`, else `<out>/features.tsv`.
    pub fn store_path(&self) -> PathBuf {
        self.store.clone().unwrap_or_else(|| self.out.join(STORE_FILE))
    }

    pub fn stride(&self) -> Option<usize> {
        match self.mode {
            SamplingMode::Tiles16 => None,
            SamplingMode::Roi16 { stride } => Some(stride),
        }
    }

    pub fn experiment(&self) -> styletree_core::ExperimentConfig {
        styletree_core::ExperimentConfig {
            seed: self.seed,
            runs: self.runs,
            train_n: self.train_n,
            test_n: self.test_n,
        }
    }

    /// The dataset root, which must be an existing directory.
    pub fn require_dataset(&self) -> Result<&Path> {
        let root = self
            .dataset
            .as_deref()
            .ok_or_else(|| Error::Config("dataset: no dataset root given".into()))?;
        if !root.is_dir() {
            return Err(Error::Config(format!("dataset: {} is not a directory", root.display())));
        }
        Ok(root)
    }

    /// The store file, which must exist.
    pub fn require_store(&self) -> Result<PathBuf> {
        let path = self.store_path();
        if !path.is_file() {
            return Err(Error::Config(format!(
                "store: {} does not exist (run extract first)",
                path.display()
            )));
        }
        Ok(path)
    }
}
