//! Brute-force dense references for small systems.
//!
//! Everything here works on the reduced state-space form with explicit dense
//! solves and products. It is meant for cross-checking the sparse solver, not
//! for production-sized problems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dense::{dense_eig, DenseError, DenseLu, DenseMatrix};
use crate::descriptor::StateSpaceSystem;
use crate::solver::{dominance, match_shifts, Matching, Method};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Eigenvector condition above which a matrix is treated as defective.
pub const NEAR_DEFECTIVE_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error("eigenvector matrix is near-defective (condition {condition:e})")]
    Defective { condition: f64 },
    #[error("Yᵀ·X is singular for the given shifts")]
    SingularProjection,
    #[error("shift {s} is an eigenvalue")]
    ShiftAtEigenvalue { s: Complex64 },
}

/// `A = P·diag(eigenvalues)·P⁻¹`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub p: DenseMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub pinv: DenseMatrix,
    /// 1-norm condition number of `P`.
    pub condition: f64,
}

impl EigenDecomposition {
    pub fn near_defective(&self) -> bool {
        self.condition > NEAR_DEFECTIVE_CONDITION
    }
}

pub fn full_spectrum(ss: &StateSpaceSystem) -> Result<EigenDecomposition, OracleError> {
    let eig = dense_eig(&ss.a)?;
    let p = eig.vectors;
    let lu = DenseLu::new(&p)?;
    let pinv = lu.inverse()?;
    let condition = p.one_norm() * pinv.one_norm();
    Ok(EigenDecomposition {
        p,
        eigenvalues: eig.values,
        pinv,
        condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueEntry {
    pub eigenvalue: Complex64,
    pub residue: Complex64,
    pub dominance: f64,
}

#[derive(Debug, Clone)]
pub struct ResidueTable {
    /// Sorted by dominance, most dominant first.
    pub entries: Vec<ResidueEntry>,
}

impl ResidueTable {
    /// Indices of entries whose residue vanishes relative to the largest one.
    pub fn vanishing(&self) -> Vec<usize> {
        let scale = self.entries.iter().map(|e| e.residue.norm()).fold(0.0, f64::max);
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.residue.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn residue_sum(&self) -> Complex64 {
        self.entries.iter().map(|e| e.residue).sum()
    }

    /// CSV with columns `re,im,residue_re,residue_im,dominance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,residue_re,residue_im,dominance\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.eigenvalue.re, e.eigenvalue.im, e.residue.re, e.residue.im, e.dominance
            ));
        }
        out
    }
}

/// Residues `R_k = (cᵀP e_k)(e_kᵀP⁻¹b)` and dominance `|R_k|/|Re λ_k|`.
pub fn residues(ss: &StateSpaceSystem) -> Result<ResidueTable, OracleError> {
    let dec = full_spectrum(ss)?;
    if dec.near_defective() {
        return Err(OracleError::Defective {
            condition: dec.condition,
        });
    }
    let pinv_b = DenseLu::new(&dec.p)?.solve(&ss.b);
    let ctp = dec.p.transpose().mul_vec(&ss.c);
    let entries: Vec<ResidueEntry> = dec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let residue = ctp[k] * pinv_b[k];
            ResidueEntry {
                eigenvalue: lambda,
                residue,
                dominance: dominance(residue, lambda),
            }
        })
        .collect();
    Ok(ResidueTable {
        entries: rank_by_dominance(entries),
    })
}

/// `Σ_{k < top_k} R_k/(s − λ_k) + d` over the most dominant poles.
pub fn modal_reconstruct(table: &ResidueTable, d: Complex64, s: Complex64, top_k: usize) -> Complex64 {
    d + table
        .entries
        .iter()
        .take(top_k)
        .map(|e| e.residue / (s - e.eigenvalue))
        .sum::<Complex64>()
}

/// Something with an eigenvalue and a dominance measure.
pub trait Ranked {
    fn eigenvalue(&self) -> Complex64;
    fn dominance(&self) -> f64;
}

impl Ranked for ResidueEntry {
    fn eigenvalue(&self) -> Complex64 {
        self.eigenvalue
    }

    fn dominance(&self) -> f64 {
        self.dominance
    }
}

impl Ranked for (Complex64, f64) {
    fn eigenvalue(&self) -> Complex64 {
        self.0
    }

    fn dominance(&self) -> f64 {
        self.1
    }
}

/// Sorts by dominance descending (infinite first); ties go to smaller `|Im|`,
/// then larger `Re`.
pub fn rank_by_dominance<T: Ranked>(mut poles: Vec<T>) -> Vec<T> {
    poles.sort_by(|a, b| {
        b.dominance()
            .total_cmp(&a.dominance())
            .then(a.eigenvalue().im.abs().total_cmp(&b.eigenvalue().im.abs()))
            .then(b.eigenvalue().re.total_cmp(&a.eigenvalue().re))
    });
    poles
}

/// State-space normalized vectors `f(s) = (A − sI)⁻¹b/ν`, `g(s) = (Aᵀ − sI)⁻¹c/ν`
/// with `ν = cᵀ(A − sI)⁻¹b`, by dense LU.
pub fn reference_vectors(
    ss: &StateSpaceSystem,
    s: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Complex64), OracleError> {
    let lu = DenseLu::new(&ss.a.shift_diagonal(s)).map_err(|_| OracleError::ShiftAtEigenvalue { s })?;
    let x = lu.solve(&ss.b);
    let y = lu.solve_transposed(&ss.c);
    let nu: Complex64 = ss.c.iter().zip(&x).map(|(a, b)| a * b).sum();
    let x = x.into_iter().map(|v| v / nu).collect();
    let y = y.into_iter().map(|v| v / nu).collect();
    Ok((x, y, nu))
}

/// `X` and `Y` blocks for a shift tuple.
pub fn reference_blocks(
    ss: &StateSpaceSystem,
    shifts: &[Complex64],
) -> Result<(DenseMatrix, DenseMatrix), OracleError> {
    let n = ss.order();
    let mut xs = Vec::with_capacity(shifts.len());
    let mut ys = Vec::with_capacity(shifts.len());
    for &s in shifts {
        let (x, y, _) = reference_vectors(ss, s)?;
        xs.push(x);
        ys.push(y);
    }
    Ok((DenseMatrix::from_columns(n, &xs), DenseMatrix::from_columns(n, &ys)))
}

/// `F(S) = (YᵀX)⁻¹·(YᵀAX)` evaluated literally.
pub fn reference_f(ss: &StateSpaceSystem, shifts: &[Complex64]) -> Result<DenseMatrix, OracleError> {
    let (x, y) = reference_blocks(ss, shifts)?;
    let yt = y.transpose();
    let ytx = yt.matmul(&x);
    let ytax = yt.matmul(&ss.a.matmul(&x));
    if ytx.condition_estimate() > 1e15 {
        return Err(OracleError::SingularProjection);
    }
    let lu = DenseLu::new(&ytx).map_err(|_| OracleError::SingularProjection)?;
    Ok(lu.solve_matrix(&ytax))
}

/// One step of either iteration on the dense system.
pub fn reference_step(
    ss: &StateSpaceSystem,
    shifts: &[Complex64],
    method: Method,
) -> Result<Vec<Complex64>, OracleError> {
    let f = reference_f(ss, shifts)?;
    Ok(match method {
        Method::Dpse => {
            let eig = dense_eig(&f)?;
            match_shifts(shifts, &eig.values, Matching::GreedyNearest)
        }
        Method::Ddpse => f.diagonal(),
    })
}

/// Shift tuples `S⁽¹⁾ … S⁽ⁱᵗᵉʳˢ⁾` from `S⁽⁰⁾`, with no deflation.
pub fn reference_sequence(
    ss: &StateSpaceSystem,
    start: &[Complex64],
    iters: usize,
    method: Method,
) -> Result<Vec<Vec<Complex64>>, OracleError> {
    let mut out = Vec::with_capacity(iters);
    let mut s = start.to_vec();
    for _ in 0..iters {
        s = reference_step(ss, &s, method)?;
        out.push(s.clone());
    }
    Ok(out)
}

/// `‖(A − sI)x‖ / ‖x‖`.
pub fn direct_residual(ss: &StateSpaceSystem, x: &[Complex64], s: Complex64) -> f64 {
    let r = ss.a.shift_diagonal(s).mul_vec(x);
    norm(&r) / norm(x)
}

/// Residual of a previous-iteration vector against a new shift without
/// touching `A`: `‖b/ν_prev + (s_prev − s_new)·x‖ / ‖x‖`, where `x` was
/// computed at `s_prev` with normalizer `ν_prev`.
pub fn residual_from_previous(
    b: &[Complex64],
    x: &[Complex64],
    nu_prev: Complex64,
    s_prev: Complex64,
    s_new: Complex64,
) -> f64 {
    let r: Vec<Complex64> = b
        .iter()
        .zip(x)
        .map(|(&bi, &xi)| bi / nu_prev + (s_prev - s_new) * xi)
        .collect();
    norm(&r) / norm(x)
}

/// `s + h(s)/h′(s)` with `h(s) = Σ R_k/(s − λ_k)` from the residue table.
pub fn newton_step(table: &ResidueTable, s: Complex64) -> Complex64 {
    let mut h = ZERO;
    let mut dh = ZERO;
    for e in &table.entries {
        let w = (s - e.eigenvalue).inv();
        h += e.residue * w;
        dh -= e.residue * w * w;
    }
    s + h / dh
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag13() -> StateSpaceSystem {
        StateSpaceSystem::from_real(&[&[-1.0, 0.0], &[0.0, -3.0]], &[1.0, 1.0], &[1.0, 1.0], 0.0)
            .unwrap()
    }

    #[test]
    fn spectrum_of_diagonal() {
        let d = full_spectrum(&diag13()).unwrap();
        let mut ev: Vec<f64> = d.eigenvalues.iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![-3.0, -1.0]);
        assert!(!d.near_defective());
    }

    #[test]
    fn spectrum_of_companion() {
        let ss = StateSpaceSystem::from_real(&[&[0.0, 1.0], &[-2.0, -3.0]], &[0.0, 1.0], &[1.0, 0.0], 0.0)
            .unwrap();
        let d = full_spectrum(&ss).unwrap();
        let mut ev: Vec<f64> = d.eigenvalues.iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 2.0).abs() < 1e-12 && (ev[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn residues_of_diagonal() {
        let t = residues(&diag13()).unwrap();
        assert!((t.entries[0].eigenvalue - c(-1.0)).norm() < 1e-14);
        assert!((t.entries[0].residue - c(1.0)).norm() < 1e-14);
        assert!((t.entries[0].dominance - 1.0).abs() < 1e-14);
        assert!((t.entries[1].dominance - 1.0 / 3.0).abs() < 1e-14);
        assert!(t.vanishing().is_empty());
    }

    #[test]
    fn orthogonal_io_gives_vanishing_residues() {
        let ss = StateSpaceSystem::from_real(&[&[-1.0, 0.0], &[0.0, -3.0]], &[1.0, 0.0], &[0.0, 1.0], 0.0)
            .unwrap();
        let t = residues(&ss).unwrap();
        assert!(t.entries.iter().all(|e| e.residue.norm() == 0.0));
        assert_eq!(t.vanishing().len(), 2);
    }

    #[test]
    fn scalar_reduction_residue() {
        let ss = StateSpaceSystem::from_real(&[&[-1.0]], &[1.0], &[1.0], 1.0).unwrap();
        let t = residues(&ss).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert!((t.entries[0].residue - c(1.0)).norm() < 1e-15);
        assert!((t.entries[0].dominance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modal_sum_hand_value() {
        let t = residues(&diag13()).unwrap();
        assert!((modal_reconstruct(&t, c(0.0), c(-0.5), 2) - c(2.4)).norm() < 1e-14);
        assert_eq!(modal_reconstruct(&t, c(0.7), c(-0.5), 0), c(0.7));
    }

    #[test]
    fn worked_projection() {
        let f = reference_f(&diag13(), &[c(-0.5), c(-2.5)]).unwrap();
        let want = [-1.125, -1.125, -0.5 / 2.4, -2.875];
        for (got, w) in f.as_slice().iter().zip(want) {
            assert!((got - c(w)).norm() < 1e-12, "{got} vs {w}");
        }
    }

    #[test]
    fn near_eigenvalue_tuple_is_nearly_diagonal() {
        let ss = diag13();
        let s = [c(-1.0 + 1e-8), c(-3.0 - 1e-8)];
        let f = reference_f(&ss, &s).unwrap();
        assert!(f.sub(&DenseMatrix::from_diagonal(&[c(-1.0), c(-3.0)])).max_abs() < 1e-6);
        let (x, y) = reference_blocks(&ss, &s).unwrap();
        let ytx = y.transpose().matmul(&x);
        // diag(1/R_k) with R = (1, 1)
        assert!(ytx.sub(&DenseMatrix::identity(2)).max_abs() < 1e-6);
    }

    #[test]
    fn duplicate_shifts_are_singular() {
        let e = reference_f(&diag13(), &[c(-0.5), c(-0.5)]).unwrap_err();
        assert_eq!(e, OracleError::SingularProjection);
    }

    #[test]
    fn rank_with_infinity_and_ties() {
        let poles = vec![
            (Complex64::new(-1.0, 2.0), 1.0),
            (Complex64::new(0.0, 1.0), f64::INFINITY),
            (Complex64::new(-1.0, -1.0), 1.0),
            (Complex64::new(-0.5, 1.0), 1.0),
            (Complex64::new(-3.0, 0.0), 5.0),
        ];
        let r = rank_by_dominance(poles);
        let order: Vec<Complex64> = r.iter().map(|p| p.0).collect();
        assert_eq!(
            order,
            vec![
                Complex64::new(0.0, 1.0),
                Complex64::new(-3.0, 0.0),
                Complex64::new(-0.5, 1.0),
                Complex64::new(-1.0, -1.0),
                Complex64::new(-1.0, 2.0),
            ]
        );
    }

    #[test]
    fn newton_step_matches_hand_value() {
        let t = residues(&diag13()).unwrap();
        let s = newton_step(&t, c(-0.5));
        assert!((s - c(-0.5 - 2.4 / 4.16)).norm() < 1e-14);
    }
}
