//! Nonsymmetric eigendecomposition: Householder reduction to Hessenberg form,
//! single-shift complex QR to Schur form, then eigenvectors by
//! back-substitution on the triangular factor.

use num_complex::Complex64;

use super::{DenseError, DenseMatrix};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: Vec<Complex64>,
    /// Unit 2-norm right eigenvectors, one per column, ordered like `values`.
    pub vectors: DenseMatrix,
}

/// Eigenvalues (with multiplicity) and unit right eigenvectors of a square matrix.
pub fn dense_eig(m: &DenseMatrix) -> Result<EigResult, DenseError> {
    if !m.is_square() {
        return Err(DenseError::NotSquare {
            nrows: m.nrows(),
            ncols: m.ncols(),
        });
    }
    if !m.is_finite() {
        return Err(DenseError::NonFinite);
    }
    let n = m.nrows();
    let (mut t, mut z) = hessenberg(m);
    schur_in_place(&mut t, &mut z)?;

    let values = t.diagonal();
    let norm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * norm;
    let mut vectors = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut v = vec![ZERO; k + 1];
        v[k] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in i + 1..=k {
                acc += t[(i, j)] * v[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            v[i] = -acc / denom;
        }
        let mut x: Vec<Complex64> = (0..n)
            .map(|r| (0..=k).map(|j| z[(r, j)] * v[j]).sum())
            .collect();
        let nrm = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in x.iter_mut() {
            *a /= nrm;
        }
        vectors.set_column(k, &x);
    }
    Ok(EigResult { values, vectors })
}

/// Returns `(H, Q)` with `M = Q·H·Qᴴ`, `H` upper Hessenberg and `Q` unitary.
fn hessenberg(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = m.nrows();
    let mut h = m.clone();
    let mut q = DenseMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 || v[1..].iter().all(|a| *a == ZERO) {
            continue;
        }
        let phase = if v[0] == ZERO { ONE } else { v[0] / v[0].norm() };
        v[0] += phase * alpha;
        let tau = 2.0 / v.iter().map(|a| a.norm_sqr()).sum::<f64>();

        for j in k..n {
            let w: Complex64 = (0..v.len()).map(|a| v[a].conj() * h[(k + 1 + a, j)]).sum();
            let w = w * tau;
            for a in 0..v.len() {
                h[(k + 1 + a, j)] -= v[a] * w;
            }
        }
        for i in 0..n {
            let w: Complex64 = (0..v.len()).map(|a| h[(i, k + 1 + a)] * v[a]).sum();
            let w = w * tau;
            for a in 0..v.len() {
                h[(i, k + 1 + a)] -= w * v[a].conj();
            }
            let w: Complex64 = (0..v.len()).map(|a| q[(i, k + 1 + a)] * v[a]).sum();
            let w = w * tau;
            for a in 0..v.len() {
                q[(i, k + 1 + a)] -= w * v[a].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Rotation `[c s; −s̄ c]` mapping `(f, g)` to `(r, 0)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, ZERO);
    }
    if fa == 0.0 {
        return (0.0, g.conj() / ga);
    }
    let norm = fa.hypot(ga);
    let phase = f / fa;
    (fa / norm, phase * g.conj() / norm)
}

fn rotate_rows(h: &mut DenseMatrix, i: usize, j: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for col in cols {
        let x = h[(i, col)];
        let y = h[(j, col)];
        h[(i, col)] = x * c + s * y;
        h[(j, col)] = -s.conj() * x + y * c;
    }
}

fn rotate_cols(h: &mut DenseMatrix, i: usize, j: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for row in rows {
        let x = h[(row, i)];
        let y = h[(row, j)];
        h[(row, i)] = x * c + y * s.conj();
        h[(row, j)] = -x * s + y * c;
    }
}

/// Reduces upper Hessenberg `t` to upper triangular Schur form, accumulating
/// the unitary transformations into `z`.
fn schur_in_place(t: &mut DenseMatrix, z: &mut DenseMatrix) -> Result<(), DenseError> {
    let n = t.nrows();
    if n == 0 {
        return Ok(());
    }
    let norm = t.frobenius_norm();
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut total = 0usize;

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let scale = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            let scale = if scale == 0.0 { norm } else { scale };
            if t[(l, l - 1)].norm() <= f64::EPSILON * scale || t[(l, l - 1)].norm() < tiny {
                t[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        total += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(DenseError::NoConvergence { iterations: total });
        }

        let mu = if sweeps % 10 == 0 {
            // exceptional shift to break cycles
            t[(hi, hi)] + Complex64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else {
            let a = t[(hi - 1, hi - 1)];
            let b = t[(hi - 1, hi)];
            let c = t[(hi, hi - 1)];
            let d = t[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };

        let (c, s) = givens(t[(l, l)] - mu, t[(l + 1, l)]);
        rotate_rows(t, l, l + 1, c, s, l..n);
        rotate_cols(t, l, l + 1, c, s, 0..(l + 3).min(hi + 1));
        rotate_cols(z, l, l + 1, c, s, 0..n);
        for k in l + 1..hi {
            let (c, s) = givens(t[(k, k - 1)], t[(k + 1, k - 1)]);
            rotate_rows(t, k, k + 1, c, s, k - 1..n);
            t[(k + 1, k - 1)] = ZERO;
            rotate_cols(t, k, k + 1, c, s, 0..(k + 3).min(hi + 1));
            rotate_cols(z, k, k + 1, c, s, 0..n);
        }
    }
    Ok(())
}
