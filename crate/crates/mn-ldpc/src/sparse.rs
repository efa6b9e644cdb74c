//! Sparse matrices over GF(q) with consistent row and column views, plus a
//! plain-text interchange format.
//!
//! File format, one matrix per file:
//!
//! ```text
//! q rows cols nnz
//! row col value        (nnz lines, 0-based indices, value in 1..q)
//! ```
//!
//! Entries may appear in any order; duplicate positions are rejected.

use std::fmt::Write as _;
use std::path::Path;

use crate::gf::GfTables;
use crate::{Error, Result};

/// A sparse matrix over GF(q). All stored values are nonzero and below q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    q: usize,
    rows: usize,
    cols: usize,
    nnz: usize,
    /// Per row: (column, value), sorted by column.
    row_entries: Vec<Vec<(usize, u8)>>,
    /// Per column: (row, value), sorted by row.
    col_entries: Vec<Vec<(usize, u8)>>,
}

impl SparseMatrix {
    /// Builds a matrix from (row, col, value) triples, validating indices,
    /// field range and duplicate positions.
    pub fn from_entries(
        q: usize,
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, u8)>,
    ) -> Result<Self> {
        let mut row_entries = vec![Vec::new(); rows];
        let mut col_entries = vec![Vec::new(); cols];
        let mut nnz = 0;
        for (r, c, v) in entries {
            if r >= rows || c >= cols {
                return Err(Error::InfeasibleParameters(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if v == 0 || v as usize >= q {
                return Err(Error::InfeasibleParameters(format!(
                    "entry value {v} outside GF({q})"
                )));
            }
            row_entries[r].push((c, v));
            col_entries[c].push((r, v));
            nnz += 1;
        }
        for row in &mut row_entries {
            row.sort_unstable_by_key(|&(c, _)| c);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InfeasibleParameters(
                    "duplicate matrix position".into(),
                ));
            }
        }
        for col in &mut col_entries {
            col.sort_unstable_by_key(|&(r, _)| r);
        }
        Ok(SparseMatrix {
            q,
            rows,
            cols,
            nnz,
            row_entries,
            col_entries,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Entries of row `i` as (column, value), sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, u8)] {
        &self.row_entries[i]
    }

    /// Entries of column `j` as (row, value), sorted by row.
    pub fn col(&self, j: usize) -> &[(usize, u8)] {
        &self.col_entries[j]
    }

    /// Value at (i, j); zero when the position is not stored.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        match self.row_entries[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(p) => self.row_entries[i][p].1,
            Err(_) => 0,
        }
    }

    /// Matrix-vector product y = M x over GF(q).
    pub fn mul_vec(&self, x: &[u8], tables: &GfTables) -> Result<Vec<u8>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut y = vec![0u8; self.rows];
        for (i, row) in self.row_entries.iter().enumerate() {
            let mut acc = 0u8;
            for &(c, v) in row {
                acc ^= tables.mul(v, x[c]);
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// Horizontal concatenation [A B]; both operands must share q and the
    /// row count.
    pub fn hconcat(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
        if a.rows != b.rows {
            return Err(Error::DimensionMismatch {
                expected: a.rows,
                got: b.rows,
            });
        }
        if a.q != b.q {
            return Err(Error::InfeasibleParameters(format!(
                "field mismatch: GF({}) vs GF({})",
                a.q, b.q
            )));
        }
        let entries = a
            .row_entries
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(c, v)| (i, c, v)))
            .chain(
                b.row_entries
                    .iter()
                    .enumerate()
                    .flat_map(|(i, row)| row.iter().map(move |&(c, v)| (i, c + a.cols, v))),
            )
            .collect::<Vec<_>>();
        SparseMatrix::from_entries(a.q, a.rows, a.cols + b.cols, entries)
    }

    /// Serializes to the text format. Entries are written in (row, col)
    /// order so that identical matrices always produce identical bytes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {} {}", self.q, self.rows, self.cols, self.nnz);
        for (i, row) in self.row_entries.iter().enumerate() {
            for &(c, v) in row {
                let _ = writeln!(out, "{i} {c} {v}");
            }
        }
        out
    }

    /// Writes the matrix to `path` in the text format.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Parses a matrix from the text format. `origin` names the source in
    /// error messages.
    pub fn parse_text(text: &str, origin: &str) -> Result<SparseMatrix> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 4 {
            return Err(parse_err(1, format!("expected `q rows cols nnz`, got `{header}`")));
        }
        let parse_usize = |s: &str, line: usize, what: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(line, format!("bad {what} `{s}`")))
        };
        let q = parse_usize(head[0], 1, "field size")?;
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(parse_err(1, format!("unsupported field size {q}")));
        }
        let rows = parse_usize(head[1], 1, "row count")?;
        let cols = parse_usize(head[2], 1, "column count")?;
        let nnz = parse_usize(head[3], 1, "entry count")?;
        if nnz == 0 {
            return Err(Error::NoEntries(origin.to_string()));
        }
        let mut entries = Vec::with_capacity(nnz);
        let mut seen = std::collections::HashSet::with_capacity(nnz);
        for _ in 0..nnz {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| parse_err(nnz + 1, format!("expected {nnz} entries")))?;
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(lineno, format!("expected `row col value`, got `{line}`")));
            }
            let r = parse_usize(fields[0], lineno, "row index")?;
            let c = parse_usize(fields[1], lineno, "column index")?;
            let v = fields[2]
                .parse::<u64>()
                .map_err(|_| parse_err(lineno, format!("bad value `{}`", fields[2])))?;
            if r >= rows || c >= cols {
                return Err(parse_err(lineno, format!("index ({r}, {c}) outside {rows}x{cols}")));
            }
            if v == 0 || v >= q as u64 {
                return Err(Error::ValueOutOfField {
                    path: origin.to_string(),
                    line: lineno,
                    value: v,
                    q,
                });
            }
            if !seen.insert((r, c)) {
                return Err(parse_err(lineno, format!("duplicate entry at ({r}, {c})")));
            }
            entries.push((r, c, v as u8));
        }
        for (idx, line) in lines {
            if !line.trim().is_empty() {
                return Err(parse_err(idx + 1, format!("unexpected trailing line `{line}`")));
            }
        }
        SparseMatrix::from_entries(q, rows, cols, entries)
    }

    /// Loads a matrix from a text-format file.
    pub fn load(path: &Path) -> Result<SparseMatrix> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        SparseMatrix::parse_text(&text, &path.display().to_string())
    }
}
