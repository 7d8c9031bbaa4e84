//! Left-looking sparse LU (Gilbert–Peierls) with threshold partial pivoting.
//!
//! Columns are taken in minimum-degree order; within a column the pivot is the
//! largest unpivoted entry, except that the diagonal entry of the symmetric
//! permutation is kept whenever it is within `DIAG_PREFERENCE` of the largest.
//! The factors satisfy `P·M·Q = L·U` with `L` unit lower triangular.

use num_complex::Complex64;

use super::{minimum_degree, SparseError, SparseMatrix};

/// Pivots at or below this fraction of `max|M|` are treated as zero.
const SINGULAR_PIVOT: f64 = 1e-14;
const DIAG_PREFERENCE: f64 = 0.1;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Immutable LU factors of a square sparse matrix.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    /// `row_perm[k]` is the original row pivoted at step `k`.
    row_perm: Vec<usize>,
    /// `col_perm[k]` is the original column eliminated at step `k`.
    col_perm: Vec<usize>,
    // L in step numbering, unit diagonal stored first in each column
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<Complex64>,
    // U in step numbering, diagonal stored last in each column
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<Complex64>,
    shift: Option<Complex64>,
    pivot_growth: f64,
}

impl Factorization {
    /// Factorizes `m` with a freshly computed minimum-degree column ordering.
    pub fn new(m: &SparseMatrix) -> Result<Self, SparseError> {
        if !m.is_square() {
            return Err(SparseError::NotSquare {
                nrows: m.nrows(),
                ncols: m.ncols(),
            });
        }
        let q = minimum_degree(m);
        Self::with_ordering(m, &q)
    }

    /// Factorizes `m` reusing a column ordering, e.g. one computed once for a
    /// family of shifted matrices sharing a pattern.
    pub fn with_ordering(m: &SparseMatrix, col_perm: &[usize]) -> Result<Self, SparseError> {
        let n = m.nrows();
        if !m.is_square() {
            return Err(SparseError::NotSquare {
                nrows: m.nrows(),
                ncols: m.ncols(),
            });
        }
        if col_perm.len() != n {
            return Err(SparseError::DimensionMismatch {
                expected: n,
                actual: col_perm.len(),
            });
        }
        let max_entry = m.max_abs();
        let threshold = SINGULAR_PIVOT * max_entry;

        let mut pinv: Vec<Option<usize>> = vec![None; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut l_idx: Vec<usize> = Vec::with_capacity(4 * m.nnz() + n);
        let mut l_val: Vec<Complex64> = Vec::with_capacity(4 * m.nnz() + n);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let mut u_idx: Vec<usize> = Vec::with_capacity(4 * m.nnz() + n);
        let mut u_val: Vec<Complex64> = Vec::with_capacity(4 * m.nnz() + n);

        let mut x = vec![ZERO; n];
        let mut xi = vec![0usize; n];
        let mut mark = vec![false; n];
        let mut stack: Vec<(usize, usize)> = Vec::with_capacity(n);
        let mut max_u = 0.0f64;

        for k in 0..n {
            l_ptr.push(l_idx.len());
            u_ptr.push(u_idx.len());
            let col = col_perm[k];
            let (b_rows, b_vals) = m.column(col);

            // reach of b's pattern in the graph of L, in topological order at xi[top..]
            let mut top = n;
            for &start in b_rows {
                if mark[start] {
                    continue;
                }
                stack.push((start, 0));
                mark[start] = true;
                while let Some(&(node, pos)) = stack.last() {
                    let mut next = None;
                    let mut pos = pos;
                    if let Some(lc) = pinv[node] {
                        let (lo, hi) = (l_ptr[lc] + 1, l_ptr[lc + 1]);
                        while lo + pos < hi {
                            let child = l_idx[lo + pos];
                            pos += 1;
                            if !mark[child] {
                                next = Some(child);
                                break;
                            }
                        }
                    }
                    stack.last_mut().expect("non-empty").1 = pos;
                    match next {
                        Some(child) => {
                            mark[child] = true;
                            stack.push((child, 0));
                        }
                        None => {
                            stack.pop();
                            top -= 1;
                            xi[top] = node;
                        }
                    }
                }
            }
            for &i in &xi[top..] {
                mark[i] = false;
                x[i] = ZERO;
            }
            for (&i, &v) in b_rows.iter().zip(b_vals) {
                x[i] = v;
            }
            // sparse triangular solve x = L \ b
            for p in top..n {
                let j = xi[p];
                if let Some(lc) = pinv[j] {
                    let xj = x[j];
                    if xj != ZERO {
                        for q in l_ptr[lc] + 1..l_ptr[lc + 1] {
                            x[l_idx[q]] -= l_val[q] * xj;
                        }
                    }
                }
            }

            let mut ipiv = None;
            let mut best = -1.0f64;
            for &i in &xi[top..] {
                match pinv[i] {
                    Some(step) => {
                        u_idx.push(step);
                        u_val.push(x[i]);
                        max_u = max_u.max(x[i].norm());
                    }
                    None => {
                        let a = x[i].norm();
                        if a > best {
                            best = a;
                            ipiv = Some(i);
                        }
                    }
                }
            }
            let mut ipiv = match ipiv {
                Some(i) if best > threshold => i,
                _ => {
                    return Err(SparseError::Singular {
                        step: k,
                        pivot: best.max(0.0),
                    })
                }
            };
            if pinv[col].is_none() && x[col].norm() >= DIAG_PREFERENCE * best {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u_idx.push(k);
            u_val.push(pivot);
            max_u = max_u.max(pivot.norm());
            pinv[ipiv] = Some(k);

            l_idx.push(ipiv);
            l_val.push(Complex64::new(1.0, 0.0));
            for &i in &xi[top..] {
                if pinv[i].is_none() {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = ZERO;
            }
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());

        let pinv: Vec<usize> = pinv.into_iter().map(|p| p.expect("full pivot")).collect();
        for r in l_idx.iter_mut() {
            *r = pinv[*r];
        }
        let mut row_perm = vec![0; n];
        for (row, &step) in pinv.iter().enumerate() {
            row_perm[step] = row;
        }

        Ok(Factorization {
            n,
            row_perm,
            col_perm: col_perm.to_vec(),
            l_ptr,
            l_idx,
            l_val,
            u_ptr,
            u_idx,
            u_val,
            shift: None,
            pivot_growth: if max_entry > 0.0 { max_u / max_entry } else { 0.0 },
        })
    }

    /// Tags the factorization with the shift `s` of the matrix `J − sE` it came from.
    pub fn with_shift(mut self, s: Complex64) -> Self {
        self.shift = Some(s);
        self
    }

    pub fn shift(&self) -> Option<Complex64> {
        self.shift
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// `max|U| / max|M|`.
    pub fn pivot_growth(&self) -> f64 {
        self.pivot_growth
    }

    pub fn row_perm(&self) -> &[usize] {
        &self.row_perm
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    /// Stored entries of L plus U minus the diagonal of L.
    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() - self.n
    }

    pub fn l_factor(&self) -> SparseMatrix {
        let t: Vec<_> = (0..self.n)
            .flat_map(|j| (self.l_ptr[j]..self.l_ptr[j + 1]).map(move |p| (p, j)))
            .map(|(p, j)| (self.l_idx[p], j, self.l_val[p]))
            .collect();
        SparseMatrix::from_triplets(self.n, self.n, &t).expect("indices in range")
    }

    pub fn u_factor(&self) -> SparseMatrix {
        let t: Vec<_> = (0..self.n)
            .flat_map(|j| (self.u_ptr[j]..self.u_ptr[j + 1]).map(move |p| (p, j)))
            .map(|(p, j)| (self.u_idx[p], j, self.u_val[p]))
            .collect();
        SparseMatrix::from_triplets(self.n, self.n, &t).expect("indices in range")
    }

    /// Solves `M x = rhs`, or `Mᵀ x = rhs` when `transposed` (no conjugation).
    pub fn solve(&self, rhs: &[Complex64], transposed: bool) -> Result<Vec<Complex64>, SparseError> {
        if rhs.len() != self.n {
            return Err(SparseError::DimensionMismatch {
                expected: self.n,
                actual: rhs.len(),
            });
        }
        Ok(if transposed {
            self.solve_transposed(rhs)
        } else {
            self.solve_plain(rhs)
        })
    }

    fn solve_plain(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut z: Vec<Complex64> = self.row_perm.iter().map(|&r| rhs[r]).collect();
        for k in 0..n {
            let zk = z[k];
            if zk != ZERO {
                for p in self.l_ptr[k] + 1..self.l_ptr[k + 1] {
                    z[self.l_idx[p]] -= self.l_val[p] * zk;
                }
            }
        }
        for k in (0..n).rev() {
            let last = self.u_ptr[k + 1] - 1;
            z[k] /= self.u_val[last];
            let zk = z[k];
            if zk != ZERO {
                for p in self.u_ptr[k]..last {
                    z[self.u_idx[p]] -= self.u_val[p] * zk;
                }
            }
        }
        let mut x = vec![ZERO; n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = z[k];
        }
        x
    }

    fn solve_transposed(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut z: Vec<Complex64> = self.col_perm.iter().map(|&c| rhs[c]).collect();
        for k in 0..n {
            let last = self.u_ptr[k + 1] - 1;
            let mut acc = z[k];
            for p in self.u_ptr[k]..last {
                acc -= self.u_val[p] * z[self.u_idx[p]];
            }
            z[k] = acc / self.u_val[last];
        }
        for k in (0..n).rev() {
            let mut acc = z[k];
            for p in self.l_ptr[k] + 1..self.l_ptr[k + 1] {
                acc -= self.l_val[p] * z[self.l_idx[p]];
            }
            z[k] = acc;
        }
        let mut x = vec![ZERO; n];
        for (k, &r) in self.row_perm.iter().enumerate() {
            x[r] = z[k];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_factors_trivially() {
        let m = SparseMatrix::from_real_triplets(2, 2, &[(0, 0, -0.5), (1, 1, -2.5)]).unwrap();
        let f = Factorization::new(&m).unwrap();
        assert_eq!(f.l_factor().to_dense(), SparseMatrix::identity(2).to_dense());
        let x = f.solve(&[c(1.0), c(1.0)], false).unwrap();
        assert!((x[0] - c(-2.0)).norm() < 1e-15);
        assert!((x[1] - c(-0.4)).norm() < 1e-15);
        assert_eq!(f.solve(&[c(1.0), c(1.0)], true).unwrap(), x);
    }

    #[test]
    fn zero_row_is_singular() {
        let m = SparseMatrix::from_real_triplets(3, 3, &[(0, 0, 1.0), (0, 1, 2.0), (2, 2, 1.0)])
            .unwrap();
        assert!(matches!(
            Factorization::new(&m),
            Err(SparseError::Singular { .. })
        ));
    }

    #[test]
    fn numerically_singular_is_reported() {
        let m = SparseMatrix::from_real_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)],
        )
        .unwrap();
        assert!(Factorization::new(&m).is_err());
    }

    #[test]
    fn needs_pivoting() {
        let m = SparseMatrix::from_real_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let f = Factorization::new(&m).unwrap();
        let x = f.solve(&[c(3.0), c(5.0)], false).unwrap();
        assert_eq!(x, vec![c(5.0), c(3.0)]);
    }

    #[test]
    fn rhs_length_checked() {
        let f = Factorization::new(&SparseMatrix::identity(3)).unwrap();
        assert!(matches!(
            f.solve(&[c(1.0)], false),
            Err(SparseError::DimensionMismatch { .. })
        ));
    }
}
