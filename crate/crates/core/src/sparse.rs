//! Compressed-sparse-row storage for feature matrices.
//!
//! Every matrix keeps its column indices strictly increasing within a row and
//! never stores explicit zeros. Both properties are checked on construction,
//! so downstream code (naive Bayes accumulation, forest column lookups) can
//! rely on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix, used for the small stylometric block before it is
/// converted to CSR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {n_rows}x{n_cols} matrix",
                values.len()
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural
    /// invariant.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::Shape(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if col_indices.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} column indices for {} values",
                col_indices.len(),
                values.len()
            )));
        }
        if row_offsets[0] != 0 || row_offsets[n_rows] != values.len() {
            return Err(Error::Shape(
                "row_offsets must start at 0 and end at the value count".into(),
            ));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::Shape(format!("row_offsets decrease at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Shape(format!(
                    "column indices of row {i} are not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= n_cols) {
                return Err(Error::Shape(format!(
                    "column index out of range in row {i} (n_cols = {n_cols})"
                )));
            }
            if values[lo..hi].contains(&0.0) {
                return Err(Error::Shape(format!("explicit zero stored in row {i}")));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles a matrix from per-row `(column, value)` lists. Entries may
    /// arrive in any column order; zeros are dropped and duplicate columns
    /// are rejected.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n_rows = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for (c, v) in row {
                if v != 0.0 {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self::new(n_rows, n_cols, row_offsets, col_indices, values)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values stored in row `i`.
    ///
    /// Panics if `i >= n_rows`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Value at `(i, j)`, zero when not stored. Uses binary search over the
    /// sorted column indices of the row.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out.values[i * self.n_cols + c] = v;
            }
        }
        out
    }

    /// Sparse inner product of row `i` with a dense vector.
    pub fn row_dot_dense(&self, i: usize, w: &[f64]) -> Result<f64> {
        if i >= self.n_rows {
            return Err(Error::OutOfBounds {
                index: i,
                len: self.n_rows,
            });
        }
        if w.len() != self.n_cols {
            return Err(Error::Shape(format!(
                "weight vector has length {}, matrix has {} columns",
                w.len(),
                self.n_cols
            )));
        }
        Ok(self.row_dot_unchecked(i, w))
    }

    /// Inner product without bounds or length checks beyond slice indexing.
    #[inline]
    pub(crate) fn row_dot_unchecked(&self, i: usize, w: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        cols.iter().zip(vals).map(|(&c, &v)| v * w[c]).sum()
    }

    /// Copies out the rows listed in `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(indices.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::OutOfBounds {
                    index: i,
                    len: self.n_rows,
                });
            }
            let (cols, vals) = self.row(i);
            col_indices.extend_from_slice(cols);
            values.extend_from_slice(vals);
            row_offsets.push(values.len());
        }
        Ok(Self {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Restricts the matrix to columns `[start, end)`, re-based to zero.
    pub fn column_slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.n_cols {
            return Err(Error::Shape(format!(
                "column range {start}..{end} outside 0..{}",
                self.n_cols
            )));
        }
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let lo = cols.partition_point(|&c| c < start);
            let hi = cols.partition_point(|&c| c < end);
            col_indices.extend(cols[lo..hi].iter().map(|&c| c - start));
            values.extend_from_slice(&vals[lo..hi]);
            row_offsets.push(values.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: end - start,
            row_offsets,
            col_indices,
            values,
        })
    }
}

/// Drops zeros from a dense matrix. Converting back with
/// [`CsrMatrix::to_dense`] reproduces the input exactly.
pub fn to_csr(d: &DenseMatrix) -> CsrMatrix {
    let mut row_offsets = Vec::with_capacity(d.n_rows + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for i in 0..d.n_rows {
        for (j, &v) in d.row(i).iter().enumerate() {
            if v != 0.0 {
                col_indices.push(j);
                values.push(v);
            }
        }
        row_offsets.push(values.len());
    }
    CsrMatrix {
        n_rows: d.n_rows,
        n_cols: d.n_cols,
        row_offsets,
        col_indices,
        values,
    }
}

/// Concatenates blocks side by side. Column indices of block `k` are shifted
/// by the total width of blocks `0..k`.
pub fn hstack(blocks: &[&CsrMatrix]) -> Result<CsrMatrix> {
    let Some(first) = blocks.first() else {
        return Err(Error::InvalidArgument("hstack needs at least one block".into()));
    };
    let n_rows = first.n_rows;
    if let Some(bad) = blocks.iter().find(|b| b.n_rows != n_rows) {
        return Err(Error::Shape(format!(
            "cannot hstack blocks with {n_rows} and {} rows",
            bad.n_rows
        )));
    }
    let n_cols = blocks.iter().map(|b| b.n_cols).sum();
    let nnz = blocks.iter().map(|b| b.nnz()).sum();
    let mut row_offsets = Vec::with_capacity(n_rows + 1);
    let mut col_indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_offsets.push(0);
    for i in 0..n_rows {
        let mut offset = 0;
        for b in blocks {
            let (cols, vals) = b.row(i);
            col_indices.extend(cols.iter().map(|&c| c + offset));
            values.extend_from_slice(vals);
            offset += b.n_cols;
        }
        row_offsets.push(values.len());
    }
    Ok(CsrMatrix {
        n_rows,
        n_cols,
        row_offsets,
        col_indices,
        values,
    })
}

/// Scales every nonzero row to unit Euclidean norm; zero rows are left alone.
pub fn l2_normalize_rows(m: &CsrMatrix) -> CsrMatrix {
    let mut out = m.clone();
    for i in 0..m.n_rows {
        let (lo, hi) = (m.row_offsets[i], m.row_offsets[i + 1]);
        normalize_in_place(&mut out.values[lo..hi]);
    }
    out
}

pub(crate) fn normalize_in_place(values: &mut [f64]) {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
}
