use num_complex::Complex64;
use rayon::prelude::*;

use super::{Matching, SolverError};
use crate::dense::{dense_eig, DenseLu, DenseMatrix};
use crate::descriptor::{DescriptorSystem, ModelError, NormalizedVectors};
use crate::solver::match_shifts;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnStatus {
    Active,
    Converged,
    /// Frozen after its shift could no longer be processed.
    Stalled,
}

/// Shift tuple plus the normalized descriptor-space columns it produced.
///
/// `shifts` is the current tuple `S`. The columns `xs[j]`, `ys[j]` were
/// computed at `vector_shifts[j]`, which differs from `shifts[j]` between a
/// step and the following refresh.
#[derive(Debug, Clone)]
pub struct ShiftState {
    pub shifts: Vec<Complex64>,
    pub vector_shifts: Vec<Complex64>,
    pub xs: Vec<Vec<Complex64>>,
    pub ys: Vec<Vec<Complex64>>,
    pub normalizers: Vec<Complex64>,
    pub status: Vec<ColumnStatus>,
    pub locked: Vec<Option<Complex64>>,
    pub iter: usize,
}

/// Relative residuals of one column against a new shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnResidual {
    pub right: f64,
    pub left: f64,
    pub converged: bool,
}

impl ShiftState {
    /// All-active state with columns computed at `shifts` (in parallel).
    pub fn compute(sys: &DescriptorSystem, shifts: &[Complex64]) -> Result<ShiftState, ModelError> {
        let cols: Vec<NormalizedVectors> = shifts
            .par_iter()
            .map(|&s| sys.normalized_vectors(s))
            .collect::<Result<_, _>>()?;
        Ok(ShiftState::from_columns(cols))
    }

    pub fn from_columns(cols: Vec<NormalizedVectors>) -> ShiftState {
        let p = cols.len();
        let mut st = ShiftState {
            shifts: Vec::with_capacity(p),
            vector_shifts: Vec::with_capacity(p),
            xs: Vec::with_capacity(p),
            ys: Vec::with_capacity(p),
            normalizers: Vec::with_capacity(p),
            status: vec![ColumnStatus::Active; p],
            locked: vec![None; p],
            iter: 0,
        };
        for c in cols {
            st.shifts.push(c.shift);
            st.vector_shifts.push(c.shift);
            st.xs.push(c.xcol);
            st.ys.push(c.ycol);
            st.normalizers.push(c.normalizer);
        }
        st
    }

    pub fn p(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.status[j] == ColumnStatus::Active
    }

    pub fn active(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.is_active(j)).collect()
    }

    /// Replaces column `j` with freshly computed vectors.
    pub fn set_column(&mut self, j: usize, col: NormalizedVectors) {
        assert!(self.is_active(j), "column {j} is locked");
        self.shifts[j] = col.shift;
        self.vector_shifts[j] = col.shift;
        self.xs[j] = col.xcol;
        self.ys[j] = col.ycol;
        self.normalizers[j] = col.normalizer;
    }
}

/// `YᵀEX`, the `p×p` matrix of dynamic-row inner products.
pub fn gram_matrix(sys: &DescriptorSystem, state: &ShiftState) -> DenseMatrix {
    let p = state.p();
    let mut g = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            g[(i, j)] = sys.e_inner(&state.ys[i], &state.xs[j]);
        }
    }
    g
}

/// The projected matrix `F`.
///
/// Active column `j` is `(YᵀEX)⁻¹e/ν_j + s_j e_j`, which is `(YᵀEX)⁻¹YᵀAX e_j`
/// because `A x_j = s_j x_j + b/ν_j` and `y_iᵀb = 1`. Locked columns are
/// `λ_j e_j`, making `F` block triangular with the locked values on the
/// diagonal.
pub fn assemble_projection(sys: &DescriptorSystem, state: &ShiftState) -> Result<DenseMatrix, SolverError> {
    let p = state.p();
    let gram = gram_matrix(sys, state);
    let g = gram_solve_ones(&gram)?;
    let mut f = DenseMatrix::zeros(p, p);
    for j in 0..p {
        match state.locked[j] {
            Some(lambda) => f[(j, j)] = lambda,
            None => {
                let v = state.normalizers[j].inv();
                for i in 0..p {
                    f[(i, j)] = g[i] * v;
                }
                f[(j, j)] += state.vector_shifts[j];
            }
        }
    }
    Ok(f)
}

fn gram_solve_ones(gram: &DenseMatrix) -> Result<Vec<Complex64>, SolverError> {
    let lu = DenseLu::new(gram).map_err(|_| SolverError::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let g = lu.solve(&vec![ONE; gram.nrows()]);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    Ok(g)
}

/// Eigenvalues of the active block of `F`, matched to the active shifts.
/// Locked positions keep their values.
pub fn dpse_step(state: &ShiftState, f: &DenseMatrix, matching: Matching) -> Result<Vec<Complex64>, SolverError> {
    let active = state.active();
    let mut out = locked_or_current(state);
    if active.is_empty() {
        return Ok(out);
    }
    let sub = f.submatrix(&active, &active);
    let values = dense_eig(&sub)?.values;
    let old: Vec<Complex64> = active.iter().map(|&j| state.vector_shifts[j]).collect();
    for (&j, v) in active.iter().zip(match_shifts(&old, &values, matching)) {
        out[j] = v;
    }
    Ok(out)
}

/// Diagonal of `F`: `s_j + g_j/ν_j` on active columns.
pub fn ddpse_step(state: &ShiftState, f: &DenseMatrix) -> Vec<Complex64> {
    let mut out = locked_or_current(state);
    for j in state.active() {
        out[j] = f[(j, j)];
    }
    out
}

fn locked_or_current(state: &ShiftState) -> Vec<Complex64> {
    (0..state.p())
        .map(|j| state.locked[j].unwrap_or(state.shifts[j]))
        .collect()
}

/// Residuals of the stored (previous-iteration) columns against `new_shifts`.
///
/// Uses `(J − s'E)x = B/ν + (s − s')Ex` for a column computed at `s`, and the
/// transposed analogue for `y`. Locked columns give `None`.
pub fn check_convergence(
    sys: &DescriptorSystem,
    state: &ShiftState,
    new_shifts: &[Complex64],
    tol: f64,
) -> Vec<Option<ColumnResidual>> {
    (0..state.p())
        .map(|j| {
            if !state.is_active(j) {
                return None;
            }
            let inv = state.normalizers[j].inv();
            let delta = state.vector_shifts[j] - new_shifts[j];
            let right = shifted_residual(sys, sys.input(), &state.xs[j], inv, delta);
            let left = shifted_residual(sys, sys.output(), &state.ys[j], inv, delta);
            Some(ColumnResidual {
                right,
                left,
                converged: right <= tol && left <= tol,
            })
        })
        .collect()
}

fn shifted_residual(sys: &DescriptorSystem, rhs: &[Complex64], v: &[Complex64], inv: Complex64, delta: Complex64) -> f64 {
    let n = sys.ndyn();
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (&r, &x)) in rhs.iter().zip(v).enumerate() {
        let mut t = r * inv;
        if i < n {
            t += delta * x;
        }
        num += t.norm_sqr();
        den += x.norm_sqr();
    }
    (num / den).sqrt()
}

/// Locks column `j` at `eigenvalue`; its vectors are never recomputed.
pub fn deflate(state: &mut ShiftState, j: usize, eigenvalue: Complex64) -> Result<(), SolverError> {
    if !state.is_active(j) {
        return Err(SolverError::DoubleDeflation { column: j });
    }
    state.status[j] = ColumnStatus::Converged;
    state.locked[j] = Some(eigenvalue);
    state.shifts[j] = eigenvalue;
    Ok(())
}

/// Freezes column `j` at its last valid vectors. It enters `F` like a locked
/// column at `vector_shifts[j]` and is not iterated further.
pub fn stall(state: &mut ShiftState, j: usize) -> Result<(), SolverError> {
    if !state.is_active(j) {
        return Err(SolverError::DoubleDeflation { column: j });
    }
    state.status[j] = ColumnStatus::Stalled;
    state.locked[j] = Some(state.vector_shifts[j]);
    state.shifts[j] = state.vector_shifts[j];
    Ok(())
}

/// `1/(yᵀEx)` from the stored columns of `j`.
pub fn estimate_residue(sys: &DescriptorSystem, state: &ShiftState, j: usize) -> Result<Complex64, SolverError> {
    let ip = sys.e_inner(&state.ys[j], &state.xs[j]);
    let scale = norm(&state.ys[j][..sys.ndyn()]) * norm(&state.xs[j][..sys.ndyn()]);
    if ip == ZERO || ip.norm() <= f64::EPSILON * scale || !ip.is_finite() {
        return Err(SolverError::VanishingInnerProduct { column: j });
    }
    Ok(ip.inv())
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::StateSpaceSystem;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag13() -> DescriptorSystem {
        StateSpaceSystem::from_real(&[&[-1.0, 0.0], &[0.0, -3.0]], &[1.0, 1.0], &[1.0, 1.0], 0.0)
            .unwrap()
            .to_descriptor()
    }

    #[test]
    fn worked_projection_and_steps() {
        let sys = diag13();
        let st = ShiftState::compute(&sys, &[c(-0.5), c(-2.5)]).unwrap();
        let f = assemble_projection(&sys, &st).unwrap();
        let want = [[-1.125, -1.125], [-0.5 / 2.4, -2.875]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((f[(i, j)] - c(want[i][j])).norm() < 1e-12);
            }
        }
        let s = dpse_step(&st, &f, Matching::GreedyNearest).unwrap();
        assert!((s[0] - c(-1.0)).norm() < 1e-12 && (s[1] - c(-3.0)).norm() < 1e-12);
        assert_eq!(ddpse_step(&st, &f), vec![c(-1.125), c(-2.875)]);
    }

    #[test]
    fn residual_after_first_step() {
        let sys = diag13();
        let st = ShiftState::compute(&sys, &[c(-0.5), c(-2.5)]).unwrap();
        let r = check_convergence(&sys, &st, &[c(-1.0), c(-3.0)], 1e-5);
        let r0 = r[0].unwrap();
        let x: [f64; 2] = [5.0 / 6.0, 1.0 / 6.0];
        let want = (1.0 / 3.0) / (x[0] * x[0] + x[1] * x[1]).sqrt();
        assert!((r0.right - want).abs() < 1e-12);
        assert!(!r0.converged);
    }

    #[test]
    fn double_deflation_rejected() {
        let sys = diag13();
        let mut st = ShiftState::compute(&sys, &[c(-0.5), c(-2.5)]).unwrap();
        deflate(&mut st, 0, c(-1.0)).unwrap();
        assert!(matches!(deflate(&mut st, 0, c(-1.0)), Err(SolverError::DoubleDeflation { column: 0 })));
        assert!(check_convergence(&sys, &st, &[c(-1.0), c(-3.0)], 1e-5)[0].is_none());
    }

    #[test]
    fn stalled_column_enters_projection_at_its_shift() {
        let sys = diag13();
        let mut st = ShiftState::compute(&sys, &[c(-0.5), c(-2.5)]).unwrap();
        stall(&mut st, 1).unwrap();
        assert_eq!(st.active(), vec![0]);
        let f = assemble_projection(&sys, &st).unwrap();
        assert_eq!(f[(1, 1)], c(-2.5));
        assert_eq!(f[(0, 1)], c(0.0));
        assert!(stall(&mut st, 1).is_err());
    }

    #[test]
    fn residue_from_eigenvector_columns() {
        let sys = diag13();
        let st = ShiftState::compute(&sys, &[c(-1.0 + 1e-9), c(-2.5)]).unwrap();
        let r = estimate_residue(&sys, &st, 0).unwrap();
        assert!((r - c(1.0)).norm() < 1e-8);
    }
}
