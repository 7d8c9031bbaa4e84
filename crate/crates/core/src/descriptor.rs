//! SISO descriptor systems `E·ẋ = J·x + B·u`, `y = Cᵀx + D·u`.
//!
//! `E` is diagonal with `ndyn` leading ones (dynamic variables) followed by
//! zeros (algebraic variables). Partitioning `J` accordingly gives blocks
//! `J1..J4`, and eliminating the algebraic variables yields the state matrix
//! `A = J1 − J2·J4⁻¹·J3` together with
//!
//! ```text
//! b = B_d − J2·J4⁻¹·B_a,   c = C_d − J3ᵀ·J4⁻ᵀ·C_a,   d = D − C_aᵀ·J4⁻¹·B_a
//! ```
//!
//! Everything the solver needs is computed from sparse factorizations of
//! `J − sE`; the dense reduction exists for the oracle and for small tests.
//!
//! Transfer functions use `h(s) = Cᵀ(sE − J)⁻¹B + D = Σ R_k/(s − λ_k) + d`.

use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::dense::{DenseError, DenseLu, DenseMatrix};
use crate::sparse::{minimum_degree, shifted, Factorization, SparseError, SparseMatrix};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what} has length {actual}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("dynamic-variable count {ndyn} out of range 1..={order}")]
    NdynOutOfRange { ndyn: usize, order: usize },
    #[error("Jacobian must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("algebraic block J4 is singular")]
    SingularAlgebraicBlock,
    #[error("J - sE is singular at s = {s}")]
    SingularShift { s: Complex64 },
    #[error("normalizer vanishes at s = {s} (|value| = {magnitude:e}); shift is near a transmission zero")]
    VanishingNormalizer { s: Complex64, magnitude: f64 },
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

/// Normalized right/left columns for one shift.
///
/// `xcol = (J − sE)⁻¹B / ν` and `ycol = (Jᵀ − sE)⁻¹C / ν`, whose leading
/// `ndyn` rows are the state-space vectors `(A − sI)⁻¹b / ν` and
/// `(Aᵀ − sI)⁻¹c / ν` with `ν = cᵀ(A − sI)⁻¹b`.
#[derive(Debug, Clone)]
pub struct NormalizedVectors {
    pub shift: Complex64,
    pub xcol: Vec<Complex64>,
    pub ycol: Vec<Complex64>,
    pub normalizer: Complex64,
    /// `Σ|c_i x_i|` over the state-space terms of `ν = cᵀ(A − sI)⁻¹b`.
    /// `|ν|` far below this means cancellation, i.e. a transmission zero.
    pub normalizer_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSample {
    pub s: Complex64,
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraicBlock {
    /// `ndyn == N`, so `A = J`.
    Empty,
    Nonsingular,
    Singular,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub order: usize,
    pub ndyn: usize,
    pub nnz: usize,
    /// Fraction of nonzero entries in `J`.
    pub density: f64,
    pub algebraic_block: AlgebraicBlock,
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct DescriptorSystem {
    j: SparseMatrix,
    ndyn: usize,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    d: Complex64,
    ordering: OnceLock<Vec<usize>>,
    feedthrough: OnceLock<Result<Complex64, ModelError>>,
    reduced_output: OnceLock<Result<Vec<Complex64>, ModelError>>,
}

impl DescriptorSystem {
    pub fn new(
        j: SparseMatrix,
        ndyn: usize,
        b: Vec<Complex64>,
        c: Vec<Complex64>,
        d: Complex64,
    ) -> Result<Self, ModelError> {
        if !j.is_square() {
            return Err(ModelError::NotSquare {
                nrows: j.nrows(),
                ncols: j.ncols(),
            });
        }
        let order = j.nrows();
        if ndyn == 0 || ndyn > order {
            return Err(ModelError::NdynOutOfRange { ndyn, order });
        }
        for (what, v) in [("B", &b), ("C", &c)] {
            if v.len() != order {
                return Err(ModelError::Dimension {
                    what,
                    expected: order,
                    actual: v.len(),
                });
            }
        }
        Ok(DescriptorSystem {
            j,
            ndyn,
            b,
            c,
            d,
            ordering: OnceLock::new(),
            feedthrough: OnceLock::new(),
            reduced_output: OnceLock::new(),
        })
    }

    /// Order `N` of the Jacobian.
    pub fn order(&self) -> usize {
        self.j.nrows()
    }

    pub fn ndyn(&self) -> usize {
        self.ndyn
    }

    pub fn jacobian(&self) -> &SparseMatrix {
        &self.j
    }

    pub fn input(&self) -> &[Complex64] {
        &self.b
    }

    pub fn output(&self) -> &[Complex64] {
        &self.c
    }

    pub fn feedthrough(&self) -> Complex64 {
        self.d
    }

    /// Copy with `B` and `C` scaled by `beta` and `gamma`.
    pub fn rescaled(&self, beta: Complex64, gamma: Complex64) -> DescriptorSystem {
        DescriptorSystem::new(
            self.j.clone(),
            self.ndyn,
            self.b.iter().map(|v| v * beta).collect(),
            self.c.iter().map(|v| v * gamma).collect(),
            self.d,
        )
        .expect("dimensions unchanged")
    }

    /// Applies `E` (zeroes the algebraic entries).
    pub fn apply_e(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| if i < self.ndyn { v } else { ZERO })
            .collect()
    }

    /// Bilinear form `yᵀ·E·x` over the dynamic rows.
    pub fn e_inner(&self, y: &[Complex64], x: &[Complex64]) -> Complex64 {
        y[..self.ndyn].iter().zip(&x[..self.ndyn]).map(|(a, b)| a * b).sum()
    }

    fn ordering(&self) -> &[usize] {
        self.ordering.get_or_init(|| {
            let pattern = shifted(&self.j, self.ndyn, Complex64::new(1.0, 0.0))
                .expect("validated at construction");
            minimum_degree(&pattern)
        })
    }

    /// Factorizes `J − sE`, reusing one fill-reducing ordering for all shifts.
    pub fn factorize_shifted(&self, s: Complex64) -> Result<Factorization, ModelError> {
        let m = shifted(&self.j, self.ndyn, s)?;
        match Factorization::with_ordering(&m, self.ordering()) {
            Ok(f) => Ok(f.with_shift(s)),
            Err(SparseError::Singular { .. }) => Err(ModelError::SingularShift { s }),
            Err(e) => Err(e.into()),
        }
    }

    fn algebraic_factorization(&self) -> Result<Option<Factorization>, ModelError> {
        let n = self.order();
        if self.ndyn == n {
            return Ok(None);
        }
        let j4 = self.j.block(self.ndyn, n, self.ndyn, n);
        match Factorization::new(&j4) {
            Ok(f) => Ok(Some(f)),
            Err(SparseError::Singular { .. }) => Err(ModelError::SingularAlgebraicBlock),
            Err(e) => Err(e.into()),
        }
    }

    /// `C_aᵀ·J4⁻¹·B_a`, the part of `Cᵀ(J − sE)⁻¹B` that does not depend on `s`.
    ///
    /// Computed once per system.
    pub fn algebraic_feedthrough(&self) -> Result<Complex64, ModelError> {
        self.feedthrough
            .get_or_init(|| {
                let Some(f) = self.algebraic_factorization()? else {
                    return Ok(ZERO);
                };
                let z = f.solve(&self.b[self.ndyn..], false)?;
                Ok(self.c[self.ndyn..].iter().zip(&z).map(|(a, b)| a * b).sum())
            })
            .clone()
    }

    /// State-space output vector `c = C_d − J3ᵀ·J4⁻ᵀ·C_a`, computed once per system.
    pub fn reduced_output(&self) -> Result<Vec<Complex64>, ModelError> {
        self.reduced_output
            .get_or_init(|| {
                let n = self.ndyn;
                let mut c = self.c[..n].to_vec();
                if let Some(f4) = self.algebraic_factorization()? {
                    let j3 = self.j.block(n, self.order(), 0, n);
                    let w = f4.solve(&self.c[n..], true)?;
                    for (ci, v) in c.iter_mut().zip(j3.mul_vec_transposed(&w)) {
                        *ci -= v;
                    }
                }
                Ok(c)
            })
            .clone()
    }

    pub fn validate(&self) -> ValidationReport {
        let order = self.order();
        let nnz = self.j.nnz();
        let mut issues = Vec::new();
        let algebraic_block = match self.algebraic_factorization() {
            Ok(None) => AlgebraicBlock::Empty,
            Ok(Some(_)) => AlgebraicBlock::Nonsingular,
            Err(e) => {
                issues.push(format!("algebraic block singular ({e})"));
                AlgebraicBlock::Singular
            }
        };
        if !self.j.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            issues.push("Jacobian has non-finite entries".into());
        }
        if self.b.iter().all(|v| *v == ZERO) {
            issues.push("input vector B is zero".into());
        }
        if self.c.iter().all(|v| *v == ZERO) {
            issues.push("output vector C is zero".into());
        }
        ValidationReport {
            order,
            ndyn: self.ndyn,
            nnz,
            density: nnz as f64 / (order as f64 * order as f64),
            algebraic_block,
            issues,
        }
    }

    /// Dense state-space form `(A, b, c, d)`. Oracle use only: `A` is dense.
    pub fn reduce_to_state_space(&self) -> Result<StateSpaceSystem, ModelError> {
        let n = self.ndyn;
        let order = self.order();
        let j1 = self.j.block(0, n, 0, n);
        let mut a = DenseMatrix::from_row_major(n, n, j1.to_dense());
        let mut b = self.b[..n].to_vec();
        let mut c = self.c[..n].to_vec();
        let mut d = self.d;

        if let Some(f4) = self.algebraic_factorization()? {
            let j2 = self.j.block(0, n, n, order);
            let j3 = self.j.block(n, order, 0, n);
            let m = order - n;
            // Z = J4⁻¹·J3, one column at a time
            let mut z = DenseMatrix::zeros(m, n);
            for col in 0..n {
                let mut rhs = vec![ZERO; m];
                let (rows, vals) = j3.column(col);
                for (&r, &v) in rows.iter().zip(vals) {
                    rhs[r] = v;
                }
                z.set_column(col, &f4.solve(&rhs, false)?);
            }
            for (i, k, v) in j2.triplets() {
                for col in 0..n {
                    let zk = z[(k, col)];
                    a[(i, col)] -= v * zk;
                }
            }
            let zb = f4.solve(&self.b[n..], false)?;
            let j2zb = j2.mul_vec(&zb);
            for (bi, v) in b.iter_mut().zip(j2zb) {
                *bi -= v;
            }
            let w = f4.solve(&self.c[n..], true)?;
            let j3w = j3.mul_vec_transposed(&w);
            for (ci, v) in c.iter_mut().zip(j3w) {
                *ci -= v;
            }
            d -= self.c[n..].iter().zip(&zb).map(|(x, y)| x * y).sum::<Complex64>();
        }
        StateSpaceSystem::new(a, b, c, d)
    }

    /// `h(s) = Cᵀ(sE − J)⁻¹B + D`.
    pub fn eval_transfer(&self, s: Complex64) -> Result<TransferSample, ModelError> {
        let f = self.factorize_shifted(s)?;
        let x = f.solve(&self.b, false)?;
        let cx: Complex64 = self.c.iter().zip(&x).map(|(a, b)| a * b).sum();
        Ok(TransferSample {
            s,
            value: self.d - cx,
        })
    }

    /// `(A − sI)⁻¹·x` computed from the augmented system `(J − sE)·(z; w) = (x; 0)`.
    pub fn apply_resolvent(&self, s: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>, ModelError> {
        if x.len() != self.ndyn {
            return Err(ModelError::Dimension {
                what: "resolvent argument",
                expected: self.ndyn,
                actual: x.len(),
            });
        }
        let f = self.factorize_shifted(s)?;
        let mut rhs = x.to_vec();
        rhs.resize(self.order(), ZERO);
        let mut z = f.solve(&rhs, false)?;
        z.truncate(self.ndyn);
        Ok(z)
    }

    /// Normalized right and left columns at shift `s`, from one factorization.
    ///
    /// The normalizer is `ν = Cᵀ(J − sE)⁻¹B − C_aᵀJ4⁻¹B_a = cᵀ(A − sI)⁻¹b`,
    /// i.e. the constant algebraic feedthrough is removed so the dynamic rows
    /// match the state-space vectors exactly. When that feedthrough is zero
    /// this is the plain `Cᵀ(J − sE)⁻¹B`.
    pub fn normalized_vectors(&self, s: Complex64) -> Result<NormalizedVectors, ModelError> {
        let f = self.factorize_shifted(s)?;
        self.normalized_vectors_with(&f, s)
    }

    pub fn normalized_vectors_with(
        &self,
        f: &Factorization,
        s: Complex64,
    ) -> Result<NormalizedVectors, ModelError> {
        let mut xcol = f.solve(&self.b, false)?;
        let mut ycol = f.solve(&self.c, true)?;
        let raw: Complex64 = self.c.iter().zip(&xcol).map(|(a, b)| a * b).sum();
        let normalizer = raw - self.algebraic_feedthrough()?;
        let normalizer_scale = self.reduced_output()?.iter().zip(&xcol).map(|(a, b)| (a * b).norm()).sum();
        let magnitude = normalizer.norm();
        if magnitude == 0.0 || !magnitude.is_finite() {
            return Err(ModelError::VanishingNormalizer { s, magnitude });
        }
        let inv = normalizer.inv();
        for v in xcol.iter_mut().chain(ycol.iter_mut()) {
            *v *= inv;
        }
        Ok(NormalizedVectors {
            shift: s,
            xcol,
            ycol,
            normalizer,
            normalizer_scale,
        })
    }
}

/// Dense `(A, b, c, d)` with `h(s) = cᵀ(sI − A)⁻¹b + d`.
#[derive(Debug, Clone)]
pub struct StateSpaceSystem {
    pub a: DenseMatrix,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub d: Complex64,
}

impl StateSpaceSystem {
    pub fn new(
        a: DenseMatrix,
        b: Vec<Complex64>,
        c: Vec<Complex64>,
        d: Complex64,
    ) -> Result<Self, ModelError> {
        if !a.is_square() {
            return Err(ModelError::NotSquare {
                nrows: a.nrows(),
                ncols: a.ncols(),
            });
        }
        let n = a.nrows();
        for (what, v) in [("b", &b), ("c", &c)] {
            if v.len() != n {
                return Err(ModelError::Dimension {
                    what,
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        Ok(StateSpaceSystem { a, b, c, d })
    }

    pub fn from_real(a: &[&[f64]], b: &[f64], c: &[f64], d: f64) -> Result<Self, ModelError> {
        let re = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(DenseMatrix::from_real_rows(a), re(b), re(c), Complex64::new(d, 0.0))
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn transfer(&self, s: Complex64) -> Result<Complex64, ModelError> {
        let lu = DenseLu::new(&self.a.shift_diagonal(s))?;
        let x = lu.solve(&self.b);
        // (A − sI)⁻¹ = −(sI − A)⁻¹
        Ok(self.d - self.c.iter().zip(&x).map(|(a, b)| a * b).sum::<Complex64>())
    }

    /// The same system viewed as a descriptor system with no algebraic part.
    pub fn to_descriptor(&self) -> DescriptorSystem {
        let n = self.order();
        DescriptorSystem::new(
            SparseMatrix::from_dense(n, n, self.a.as_slice()),
            n,
            self.b.clone(),
            self.c.clone(),
            self.d,
        )
        .expect("consistent dimensions")
    }
}
