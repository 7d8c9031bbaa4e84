//! Complex sparse matrices in compressed-sparse-column layout.

mod lu;
mod mtx;
mod ordering;

pub use lu::Factorization;
pub use mtx::{
    format_matrix_market, parse_matrix_market, read_matrix_market, read_vector, write_matrix_market,
    write_vector, MtxError,
};
pub use ordering::minimum_degree;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SparseError {
    #[error("entry ({row}, {col}) is outside a {nrows}x{ncols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("dynamic-variable count {ndyn} out of range for order {order}")]
    NdynOutOfRange { ndyn: usize, order: usize },
    #[error("matrix is singular at elimination step {step} (pivot magnitude {pivot:e})")]
    Singular { step: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Sparse complex matrix stored by columns.
///
/// Row indices are strictly increasing within each column and there are no
/// duplicate entries. Explicit zeros are allowed (they keep a pattern stable
/// across shifts).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<Self, SparseError> {
        for &(row, col, _) in triplets {
            if row >= nrows || col >= ncols {
                return Err(SparseError::OutOfBounds {
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, Complex64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (row, col, v) in sorted {
            if last == Some((row, col)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_idx.push(row);
            values.push(v);
            col_ptr[col + 1] += 1;
            last = Some((row, col));
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn from_real_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        let t: Vec<_> = triplets
            .iter()
            .map(|&(r, c, v)| (r, c, Complex64::new(v, 0.0)))
            .collect();
        Self::from_triplets(nrows, ncols, &t)
    }

    /// Builds from a dense row-major slice, keeping only nonzero entries.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        let mut t = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = data[i * ncols + j];
                if v != Complex64::new(0.0, 0.0) {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &t).expect("indices in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_ptr[self.ncols]
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[Complex64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let (rows, vals) = self.column(col);
        match rows.binary_search(&row) {
            Ok(k) => vals[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterates stored entries as (row, col, value) in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.column(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        SparseMatrix::from_triplets(self.ncols, self.nrows, &t).expect("indices in range")
    }

    /// y = M x
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * xj;
            }
        }
        y
    }

    /// y = Mᵀ x (plain transpose, no conjugation)
    pub fn mul_vec_transposed(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.nrows);
        (0..self.ncols)
            .map(|j| {
                let (rows, vals) = self.column(j);
                rows.iter().zip(vals).map(|(&i, &v)| v * x[i]).sum()
            })
            .collect()
    }

    /// Extracts the block with rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> SparseMatrix {
        let t: Vec<_> = self
            .triplets()
            .filter(|&(i, j, _)| i >= r0 && i < r1 && j >= c0 && j < c1)
            .map(|(i, j, v)| (i - r0, j - c0, v))
            .collect();
        SparseMatrix::from_triplets(r1 - r0, c1 - c0, &t).expect("indices in range")
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut d = vec![Complex64::new(0.0, 0.0); self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            d[i * self.ncols + j] = v;
        }
        d
    }

    /// Checks the storage invariants. Used by tests and after file reads.
    pub fn check_invariants(&self) -> bool {
        if self.col_ptr.len() != self.ncols + 1 || self.col_ptr[0] != 0 {
            return false;
        }
        if self.col_ptr.windows(2).any(|w| w[0] > w[1]) {
            return false;
        }
        if self.nnz() != self.row_idx.len() || self.nnz() != self.values.len() {
            return false;
        }
        (0..self.ncols).all(|j| {
            let (rows, _) = self.column(j);
            rows.windows(2).all(|w| w[0] < w[1]) && rows.iter().all(|&r| r < self.nrows)
        })
    }
}

/// Returns `J − sE` where `E = diag(1, …, 1, 0, …, 0)` has `ndyn` leading ones.
///
/// The result carries the union of J's pattern and the first `ndyn` diagonal
/// positions, so every shift of the same J shares one sparsity pattern.
pub fn shifted(j: &SparseMatrix, ndyn: usize, s: Complex64) -> Result<SparseMatrix, SparseError> {
    if !j.is_square() {
        return Err(SparseError::NotSquare {
            nrows: j.nrows,
            ncols: j.ncols,
        });
    }
    if ndyn > j.nrows {
        return Err(SparseError::NdynOutOfRange {
            ndyn,
            order: j.nrows,
        });
    }
    let mut col_ptr = Vec::with_capacity(j.ncols + 1);
    let mut row_idx = Vec::with_capacity(j.nnz() + ndyn);
    let mut values = Vec::with_capacity(j.nnz() + ndyn);
    col_ptr.push(0);
    for c in 0..j.ncols {
        let (rows, vals) = j.column(c);
        let mut placed = c >= ndyn;
        for (&r, &v) in rows.iter().zip(vals) {
            if !placed && r > c {
                row_idx.push(c);
                values.push(-s);
                placed = true;
            }
            if r == c && c < ndyn {
                row_idx.push(r);
                values.push(v - s);
                placed = true;
            } else {
                row_idx.push(r);
                values.push(v);
            }
        }
        if !placed {
            row_idx.push(c);
            values.push(-s);
        }
        col_ptr.push(row_idx.len());
    }
    Ok(SparseMatrix {
        nrows: j.nrows,
        ncols: j.ncols,
        col_ptr,
        row_idx,
        values,
    })
}
