//! Tab-separated feature store shared by every command after `extract`.
//!
//! ```text
//! # styletree feature store
//! # tool_version=0.1.0
//! # bank_version=v1
//! # mode=roi
//! # stride=50
//! # seed=7
//! sample  category  patch  x0  y0  <one column per descriptor>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading a store back
//! reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use styletree_core::sampler::PATCHES_PER_IMAGE;
use styletree_core::{Error, FeatureBank, FeatureTable, PatchFeatures, Result, SampleFeatures};

use crate::config::RunConfig;
use crate::output::{write_atomic_with, HeaderBlock};

pub const STORE_TITLE: &str = "styletree feature store";
const FIXED_COLUMNS: [&str; 5] = ["sample", "category", "patch", "x0", "y0"];

/// Provenance recorded at the top of a store.
#[derive(Clone, Debug, PartialEq)]
pub struct StoreHeader {
    pub tool_version: String,
    pub bank_version: String,
    pub mode: String,
    pub stride: Option<usize>,
    pub seed: u64,
}

impl StoreHeader {
    pub fn for_config(cfg: &RunConfig) -> Self {
        StoreHeader {
            tool_version: crate::VERSION.to_string(),
            bank_version: cfg.bank_version.clone(),
            mode: cfg.mode.name().to_string(),
            stride: cfg.stride(),
            seed: cfg.seed,
        }
    }

    fn block(&self) -> HeaderBlock {
        let mut h = HeaderBlock::new(STORE_TITLE);
        h.push("tool_version", &self.tool_version);
        h.push("bank_version", &self.bank_version);
        h.push("mode", &self.mode);
        h.push("stride", self.stride.map_or("none".to_string(), |s| s.to_string()));
        h.push("seed", self.seed);
        h
    }

    /// Fails with a configuration error naming the first field on which the
    /// store and the requested configuration disagree.
    pub fn check_compatible(&self, cfg: &RunConfig) -> Result<()> {
        let want = StoreHeader::for_config(cfg);
        let fields = [
            ("bank_version", self.bank_version.clone(), want.bank_version),
            ("mode", self.mode.clone(), want.mode),
            ("stride", format!("{:?}", self.stride), format!("{:?}", want.stride)),
        ];
        for (name, have, want) in fields {
            if have != want {
                return Err(Error::Config(format!(
                    "store field '{name}' is {have} but the configuration asks for {want}"
                )));
            }
        }
        Ok(())
    }
}

/// Streams a table to `path`; the file appears only once fully written.
pub fn write_store(path: &Path, header: &StoreHeader, table: &FeatureTable) -> Result<()> {
    let bank = FeatureBank::by_version(&table.bank_version)?;
    if header.bank_version != table.bank_version {
        return Err(Error::Contract(format!(
            "header bank {} does not match table bank {}",
            header.bank_version, table.bank_version
        )));
    }
    write_atomic_with(path, |w| {
        let mut w = BufWriter::new(w);
        w.write_all(header.block().render().as_bytes())?;
        let columns: Vec<String> = FIXED_COLUMNS
            .iter()
            .map(|c| c.to_string())
            .chain(bank.column_names())
            .collect();
        writeln!(w, "{}", columns.join("\t"))?;
        for s in &table.samples {
            for p in &s.patches {
                write!(w, "{}\t{}\t{}\t{}\t{}", s.id, s.category, p.index, p.x0, p.y0)?;
                for v in &p.values {
                    write!(w, "\t{v}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()
    })
}

/// Checks that identifiers can be written into a TSV cell unambiguously.
pub fn check_cell(field: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.contains(['\t', '\n', '\r']) {
        return Err(Error::Dataset(format!(
            "{field} {value:?} cannot be stored in a TSV cell"
        )));
    }
    Ok(())
}

pub fn read_store(path: &Path) -> Result<(StoreHeader, FeatureTable)> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let fail = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = BufReader::new(file).lines().enumerate().map(|(i, l)| {
        l.map(|l| (i + 1, l)).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    });

    let (lineno, title) = lines.next().transpose()?.ok_or_else(|| fail(1, "empty store".into()))?;
    if title != format!("# {STORE_TITLE}") {
        return Err(fail(lineno, format!("not a feature store (first line {title:?})")));
    }
    let mut fields = Vec::new();
    let (mut lineno, columns) = loop {
        let (n, line) = lines
            .next()
            .transpose()?
            .ok_or_else(|| fail(0, "missing column header".into()))?;
        match line.strip_prefix("# ") {
            Some(kv) => {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| fail(n, format!("bad header line {line:?}")))?;
                fields.push((k.to_string(), v.to_string()));
            }
            None => break (n, line),
        }
    };
    let get = |key: &str| {
        fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| fail(lineno, format!("header lacks '{key}'")))
    };
    let header = StoreHeader {
        tool_version: get("tool_version")?,
        bank_version: get("bank_version")?,
        mode: get("mode")?,
        stride: match get("stride")?.as_str() {
            "none" => None,
            s => Some(s.parse().map_err(|_| fail(lineno, format!("bad stride {s:?}")))?),
        },
        seed: get("seed")?.parse().map_err(|_| fail(lineno, "bad seed".into()))?,
    };
    let bank = FeatureBank::by_version(&header.bank_version).map_err(|e| e.context(path.display().to_string()))?;
    let expected: Vec<String> = FIXED_COLUMNS
        .iter()
        .map(|c| c.to_string())
        .chain(bank.column_names())
        .collect();
    let got: Vec<&str> = columns.split('\t').collect();
    if got != expected {
        let at = got
            .iter()
            .zip(&expected)
            .position(|(a, b)| a != b)
            .unwrap_or(got.len().min(expected.len()));
        return Err(fail(
            lineno,
            format!(
                "column header does not match bank {} (first difference at column {})",
                header.bank_version,
                at + 1
            ),
        ));
    }

    let mut samples: Vec<SampleFeatures> = Vec::new();
    for item in lines {
        let (n, line) = item?;
        lineno = n;
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != expected.len() {
            return Err(fail(n, format!("{} cells, expected {}", cells.len(), expected.len())));
        }
        let int = |i: usize| -> Result<usize> {
            cells[i]
                .parse()
                .map_err(|_| fail(n, format!("{} is not an integer: {:?}", FIXED_COLUMNS[i], cells[i])))
        };
        let values = cells[5..]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| fail(n, format!("bad value {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let patch = PatchFeatures {
            index: int(2)?,
            x0: int(3)?,
            y0: int(4)?,
            values,
        };
        let (id, category) = (cells[0], cells[1]);
        match samples.last_mut() {
            Some(s) if s.id == id => {
                if s.category != category {
                    return Err(fail(n, format!("{id} listed under two categories")));
                }
                s.patches.push(patch);
            }
            _ => {
                if samples.iter().any(|s| s.id == id) {
                    return Err(fail(n, format!("rows of {id} are not contiguous")));
                }
                samples.push(SampleFeatures {
                    id: id.to_string(),
                    category: category.to_string(),
                    patches: vec![patch],
                });
            }
        }
    }
    for s in &samples {
        let indices: Vec<usize> = s.patches.iter().map(|p| p.index).collect();
        if indices != (0..PATCHES_PER_IMAGE).collect::<Vec<_>>() {
            return Err(fail(
                lineno,
                format!("{} has patches {indices:?}, expected 0..{PATCHES_PER_IMAGE}", s.id),
            ));
        }
    }
    if samples.is_empty() {
        return Err(fail(lineno, "store has no samples".into()));
    }
    let table = FeatureTable::new(header.bank_version.clone(), samples)?;
    Ok((header, table))
}
