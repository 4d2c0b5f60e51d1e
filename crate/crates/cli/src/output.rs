//! Report files: `# key=value` header blocks, matrix tables and atomic writes.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use styletree_core::{CategoryMatrix, Error, Result};

/// Commented provenance lines written at the top of every TSV artifact.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeaderBlock {
    title: String,
    fields: Vec<(String, String)>,
}

impl HeaderBlock {
    pub fn new(title: impl Into<String>) -> Self {
        HeaderBlock {
            title: title.into(),
            fields: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with(mut self, key: &str, value: impl Display) -> Self {
        self.push(key, value);
        self
    }

    pub fn render(&self) -> String {
        let mut s = format!("# {}\n", self.title);
        for (k, v) in &self.fields {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s
    }

    /// The same fields as a two-column TSV, for artifacts that cannot carry
    /// comments themselves (Newick, Phylip).
    pub fn render_sidecar(&self) -> String {
        let mut s = format!("key\tvalue\nartifact\t{}\n", self.title);
        for (k, v) in &self.fields {
            s.push_str(&format!("{k}\t{v}\n"));
        }
        s
    }
}

/// Writes via a temporary file in the destination directory and renames it
/// into place, so a failed write never leaves a partial artifact behind.
pub fn write_atomic_with(path: &Path, body: impl FnOnce(&mut fs::File) -> io::Result<()>) -> Result<()> {
    let io_err = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    body(tmp.as_file_mut()).map_err(io_err)?;
    tmp.as_file_mut().flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    write_atomic_with(path, |f| f.write_all(contents.as_bytes()))
}

/// `%.9g`: nine significant digits, trailing zeros trimmed, scientific
/// notation outside `1e-4 <= |v| < 1e9`.
pub fn fmt_sig9(v: f64) -> String {
    const P: i32 = 9;
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..P).contains(&exp) {
        trim(&format!("{:.*}", (P - 1 - exp) as usize, v))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

/// Square category table: a `category` header row, then one row per
/// category. Values carry nine significant digits.
pub fn matrix_tsv(header: &HeaderBlock, m: &CategoryMatrix) -> String {
    let mut s = header.render();
    s.push_str("category");
    for c in &m.categories {
        s.push('\t');
        s.push_str(c);
    }
    s.push('\n');
    for (name, row) in m.categories.iter().zip(&m.values) {
        s.push_str(name);
        for &v in row {
            s.push('\t');
            s.push_str(&fmt_sig9(v));
        }
        s.push('\n');
    }
    s
}

/// Parses a file produced by [`matrix_tsv`], skipping the header block.
pub fn parse_matrix_tsv(text: &str) -> Result<CategoryMatrix> {
    let bad = |m: String| Error::Format {
        path: "<matrix>".into(),
        message: m,
    };
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let head = lines.next().ok_or_else(|| bad("empty matrix".into()))?;
    let categories: Vec<String> = head
        .strip_prefix("category\t")
        .ok_or_else(|| bad("missing category header".into()))?
        .split('\t')
        .map(String::from)
        .collect();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut cells = line.split('\t');
        if cells.next() != categories.get(i).map(String::as_str) {
            return Err(bad(format!("row {} is out of order", i + 1)));
        }
        values.push(
            cells
                .map(|c| c.parse::<f64>().map_err(|_| bad(format!("bad value {c:?}"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    CategoryMatrix::new(categories, values)
}
