//! Text formats for matrices.
//!
//! Dense: a header line `rows cols`, then the entries in row-major order,
//! whitespace separated, printed with 17 significant digits (one matrix row
//! per line when written by this crate).
//!
//! Sparse binary: a header line `rows cols nnz`, then one `i j` line
//! (0-based) per nonzero; every stored value is implicitly 1.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// A 0/1 matrix stored as its sorted, deduplicated list of nonzero positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseBinary {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize)>,
}

impl SparseBinary {
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(i, j)) = entries.iter().find(|&&(i, j)| i >= rows || j >= cols) {
            return Err(Error::Domain(format!(
                "entry ({i}, {j}) outside a {rows}x{cols} matrix"
            )));
        }
        entries.sort_unstable();
        entries.dedup();
        Ok(Self { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn density(&self) -> f64 {
        if self.rows * self.cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.rows * self.cols) as f64
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Array2::zeros((self.rows, self.cols));
        for &(i, j) in &self.entries {
            m[[i, j]] = 1.0;
        }
        m
    }
}

pub fn format_dense(m: &Mat) -> String {
    let (r, c) = m.dim();
    let mut out = format!("{r} {c}\n");
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{v:.16e}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn parse_dense(text: &str) -> Result<Mat> {
    let mut tokens = text.split_whitespace();
    let rows = next_usize(&mut tokens, "rows")?;
    let cols = next_usize(&mut tokens, "cols")?;
    let values: Vec<f64> = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value {t:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} values for a {rows}x{cols} matrix, found {}",
            rows * cols,
            values.len()
        )));
    }
    Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Parse(e.to_string()))
}

pub fn format_sparse(m: &SparseBinary) -> String {
    let mut out = format!("{} {} {}\n", m.rows, m.cols, m.nnz());
    for &(i, j) in &m.entries {
        writeln!(out, "{i} {j}").expect("write to string");
    }
    out
}

pub fn parse_sparse(text: &str) -> Result<SparseBinary> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty sparse file".into()))?;
    let mut h = header.split_whitespace();
    let rows = next_usize(&mut h, "rows")?;
    let cols = next_usize(&mut h, "cols")?;
    let nnz = next_usize(&mut h, "nnz")?;
    let mut entries = Vec::with_capacity(nnz);
    for line in lines {
        let mut t = line.split_whitespace();
        let i = next_usize(&mut t, "row index")?;
        let j = next_usize(&mut t, "col index")?;
        if t.next().is_some() {
            return Err(Error::Parse(format!("trailing data on line {line:?}")));
        }
        entries.push((i, j));
    }
    if entries.len() != nnz {
        return Err(Error::Parse(format!(
            "header declares {nnz} nonzeros, found {}",
            entries.len()
        )));
    }
    let m = SparseBinary::new(rows, cols, entries)?;
    if m.nnz() != nnz {
        return Err(Error::Parse("duplicate nonzero positions".into()));
    }
    Ok(m)
}

fn next_usize<'a>(it: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<usize> {
    let t = it.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    t.parse::<usize>()
        .map_err(|e| Error::Parse(format!("bad {what} {t:?}: {e}")))
}

/// Write `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_dense(path: &Path, m: &Mat) -> Result<()> {
    write_atomic(path, format_dense(m).as_bytes())
}

pub fn read_dense(path: &Path) -> Result<Mat> {
    parse_dense(&fs::read_to_string(path)?)
}

pub fn write_sparse(path: &Path, m: &SparseBinary) -> Result<()> {
    write_atomic(path, format_sparse(m).as_bytes())
}

pub fn read_sparse(path: &Path) -> Result<SparseBinary> {
    parse_sparse(&fs::read_to_string(path)?)
}
