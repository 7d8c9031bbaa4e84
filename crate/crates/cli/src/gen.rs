//! Synthetic descriptor systems with a known state matrix.
//!
//! The state matrix is a block-diagonal `A₀` (scalars for real eigenvalues,
//! `[[σ, ω], [−ω, σ]]` for `σ ± iω`). A random sparse `J2`, a diagonally
//! dominant sparse `J4` and `J3 = J4·K` for a random sparse `K` couple in the
//! algebraic variables, and `J1 = A₀ + J2·J4⁻¹·J3 = A₀ + J2·K` so that
//! eliminating them gives back `A₀`. Building `J3` through `K` keeps `J1`
//! sparse; `J4⁻¹` itself is dense.

use std::fs;
use std::path::{Path, PathBuf};

use dpse_core::dense::DenseMatrix;
use dpse_core::oracle::residues;
use dpse_core::sparse::{write_matrix_market, write_vector};
use dpse_core::{Complex64, DescriptorSystem, SparseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::manifest::{GroundTruth, Manifest};

/// Residues below this magnitude trigger resampling of `B` and `C`.
pub const MIN_RESIDUE: f64 = 1e-6;
const SPECTRUM_ATTEMPTS: usize = 10_000;
const IO_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub n_states: usize,
    pub n_algebraic: usize,
    /// Number of conjugate pairs among the `n_states` eigenvalues.
    pub pairs: usize,
    /// Damping-ratio range for the conjugate pairs.
    pub damping: (f64, f64),
    /// Natural-frequency range for the conjugate pairs.
    pub frequency: (f64, f64),
    /// Range of `|λ|` for the real eigenvalues.
    pub real_range: (f64, f64),
    /// Minimum distance between any two eigenvalues.
    pub separation: f64,
    /// Probability of a nonzero in `J2`, `K` and the off-diagonal part of `J4`.
    pub density: f64,
    pub seed: u64,
    /// Prescribed spectrum, closed under conjugation; overrides the sampled one.
    pub eigenvalues: Option<Vec<Complex64>>,
    /// Use `B = C = ones` instead of random vectors.
    pub unit_io: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            n_states: 60,
            n_algebraic: 40,
            pairs: 10,
            damping: (0.01, 0.3),
            frequency: (0.5, 6.0),
            real_range: (0.5, 10.0),
            separation: 0.1,
            density: 0.05,
            seed: 1,
            eigenvalues: None,
            unit_io: false,
        }
    }
}

impl GenOptions {
    fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Usage(m));
        if self.n_states == 0 {
            return fail("n-states must be positive".into());
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return fail(format!("density must lie in (0, 1], got {}", self.density));
        }
        if self.eigenvalues.is_none() {
            if 2 * self.pairs > self.n_states {
                return fail(format!("{} pairs need at least {} states", self.pairs, 2 * self.pairs));
            }
            let (lo, hi) = self.damping;
            if !(0.0 < lo && lo <= hi && hi < 1.0) {
                return fail(format!("damping range must satisfy 0 < lo <= hi < 1, got {lo}..{hi}"));
            }
            let ordered = |(lo, hi): (f64, f64)| 0.0 < lo && lo <= hi;
            if !ordered(self.frequency) || !ordered(self.real_range) {
                return fail("frequency and real ranges must be positive and ordered".into());
            }
        }
        Ok(())
    }
}

/// A generated system with everything needed to write it out.
#[derive(Debug, Clone)]
pub struct Generated {
    pub jacobian: SparseMatrix,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub ndyn: usize,
    pub truth: GroundTruth,
}

impl Generated {
    pub fn system(&self) -> DescriptorSystem {
        DescriptorSystem::new(self.jacobian.clone(), self.ndyn, self.b.clone(), self.c.clone(), zero())
            .expect("generator output is consistent")
    }

    /// Writes `J.mtx`, `B.mtx`, `C.mtx`, `ground_truth.json` and
    /// `manifest.toml` into `dir`; returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mtx = |name: &str, r: Result<(), dpse_core::sparse::MtxError>| {
            r.map_err(|source| CliError::Mtx {
                path: dir.join(name),
                source,
            })
        };
        mtx("J.mtx", write_matrix_market(dir.join("J.mtx"), &self.jacobian))?;
        mtx("B.mtx", write_vector(dir.join("B.mtx"), &self.b))?;
        mtx("C.mtx", write_vector(dir.join("C.mtx"), &self.c))?;
        let truth = serde_json::to_string_pretty(&self.truth)? + "\n";
        let truth_path = dir.join("ground_truth.json");
        fs::write(&truth_path, truth).map_err(|e| CliError::io(&truth_path, e))?;
        let manifest = Manifest {
            jacobian_path: "J.mtx".into(),
            b_path: "B.mtx".into(),
            c_path: "C.mtx".into(),
            ndyn: self.ndyn,
            d_re: 0.0,
            d_im: 0.0,
            ground_truth_path: Some("ground_truth.json".into()),
        };
        let text = toml::to_string(&manifest).map_err(|e| CliError::usage(e.to_string()))?;
        let path = dir.join("manifest.toml");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

pub fn generate(opts: &GenOptions) -> Result<Generated, CliError> {
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let spectrum = match &opts.eigenvalues {
        Some(ev) => arrange_prescribed(ev, opts.n_states)?,
        None => sample_spectrum(opts, &mut rng)?,
    };
    let (n, m) = (spectrum.len(), opts.n_algebraic);
    let a0 = block_diagonal(&spectrum);

    let j2 = random_sparse(n, m, opts.density, &mut rng);
    let k = random_sparse(m, n, opts.density, &mut rng);
    let j4 = dominant_block(m, opts.density, &mut rng);
    let j3 = j4.matmul(&k);
    let mut j1 = a0;
    let coupling = j2.matmul(&k);
    for i in 0..n {
        for j in 0..n {
            j1[(i, j)] += coupling[(i, j)];
        }
    }
    let mut triplets = Vec::new();
    let mut push = |block: &DenseMatrix, r0: usize, c0: usize| {
        for i in 0..block.nrows() {
            for j in 0..block.ncols() {
                let v = block[(i, j)];
                if v != zero() {
                    triplets.push((r0 + i, c0 + j, v));
                }
            }
        }
    };
    push(&j1, 0, 0);
    push(&j2, 0, n);
    push(&j3, n, 0);
    push(&j4, n, n);
    let jacobian = SparseMatrix::from_triplets(n + m, n + m, &triplets).expect("indices in range");

    let mut attempts = 0;
    loop {
        attempts += 1;
        let (b, c) = if opts.unit_io {
            (vec![re(1.0); n + m], vec![re(1.0); n + m])
        } else {
            (random_vec(n + m, &mut rng), random_vec(n + m, &mut rng))
        };
        let sys = DescriptorSystem::new(jacobian.clone(), n, b.clone(), c.clone(), zero())?;
        let table = residues(&sys.reduce_to_state_space()?)?;
        let smallest = table.entries.iter().map(|e| e.residue.norm()).fold(f64::INFINITY, f64::min);
        if smallest > MIN_RESIDUE {
            let truth = GroundTruth {
                n_states: n,
                n_algebraic: m,
                seed: opts.seed,
                spectrum,
                residues: table.entries,
            };
            return Ok(Generated {
                jacobian,
                b,
                c,
                ndyn: n,
                truth,
            });
        }
        if opts.unit_io || attempts >= IO_ATTEMPTS {
            return Err(CliError::Generation {
                attempts,
                reason: format!("smallest residue {smallest:e} is not above {MIN_RESIDUE:e}"),
            });
        }
    }
}

/// Orders a prescribed spectrum as real values and `(λ, λ̄)` pairs with `Im λ > 0`.
fn arrange_prescribed(ev: &[Complex64], n_states: usize) -> Result<Vec<Complex64>, CliError> {
    if ev.len() != n_states {
        return Err(CliError::usage(format!(
            "{} eigenvalues given for {n_states} states",
            ev.len()
        )));
    }
    let mut out = Vec::with_capacity(ev.len());
    for &z in ev {
        if z.im == 0.0 {
            out.push(z);
        } else if z.im > 0.0 {
            let partners = ev.iter().filter(|&&w| w == z.conj()).count();
            let copies = ev.iter().filter(|&&w| w == z).count();
            if partners != copies {
                return Err(CliError::usage(format!("eigenvalue {z} has no conjugate partner")));
            }
            out.push(z);
            out.push(z.conj());
        }
    }
    if out.len() != ev.len() {
        return Err(CliError::usage("eigenvalues are not closed under conjugation"));
    }
    Ok(out)
}

fn sample_spectrum(opts: &GenOptions, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>, CliError> {
    let mut out: Vec<Complex64> = Vec::with_capacity(opts.n_states);
    let far = |z: Complex64, out: &[Complex64]| out.iter().all(|w| (z - w).norm() >= opts.separation);
    let mut tries = 0;
    let mut budget = || {
        tries += 1;
        if tries > SPECTRUM_ATTEMPTS {
            Err(CliError::Generation {
                attempts: SPECTRUM_ATTEMPTS,
                reason: format!("cannot place eigenvalues {} apart", opts.separation),
            })
        } else {
            Ok(())
        }
    };
    while out.len() < 2 * opts.pairs {
        budget()?;
        let zeta = rng.gen_range(opts.damping.0..=opts.damping.1);
        let wn = rng.gen_range(opts.frequency.0..=opts.frequency.1);
        let z = Complex64::new(-zeta * wn, wn * (1.0 - zeta * zeta).sqrt());
        if 2.0 * z.im >= opts.separation && far(z, &out) && far(z.conj(), &out) {
            out.push(z);
            out.push(z.conj());
        }
    }
    while out.len() < opts.n_states {
        budget()?;
        let z = re(-rng.gen_range(opts.real_range.0..=opts.real_range.1));
        if far(z, &out) {
            out.push(z);
        }
    }
    Ok(out)
}

fn block_diagonal(spectrum: &[Complex64]) -> DenseMatrix {
    let n = spectrum.len();
    let mut a = DenseMatrix::zeros(n, n);
    let mut k = 0;
    while k < n {
        let z = spectrum[k];
        a[(k, k)] = re(z.re);
        if z.im == 0.0 {
            k += 1;
        } else {
            a[(k + 1, k + 1)] = re(z.re);
            a[(k, k + 1)] = re(z.im);
            a[(k + 1, k)] = re(-z.im);
            k += 2;
        }
    }
    a
}

fn random_sparse(rows: usize, cols: usize, density: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen_bool(density) {
                m[(i, j)] = re(rng.gen_range(-1.0..1.0));
            }
        }
    }
    m
}

/// Sparse block with a strictly dominant diagonal of random sign.
fn dominant_block(m: usize, density: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut a = random_sparse(m, m, density, rng);
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        a[(i, i)] = re(sign * (1.0 + off + rng.gen_range(0.0..1.0)));
    }
    a
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| re(rng.gen_range(-1.0..1.0))).collect()
}
