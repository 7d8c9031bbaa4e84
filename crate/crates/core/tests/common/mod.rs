#![allow(dead_code)]

use dpse_core::dense::DenseMatrix;
use dpse_core::{Complex64, DescriptorSystem, SparseMatrix, StateSpaceSystem};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn diag13() -> StateSpaceSystem {
    StateSpaceSystem::from_real(&[&[-1.0, 0.0], &[0.0, -3.0]], &[1.0, 1.0], &[1.0, 1.0], 0.0).unwrap()
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn vec_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Left-half-plane spectrum of order `n` (real values and conjugate pairs)
/// with pairwise distance at least `sep`.
pub fn random_spectrum(n: usize, sep: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    let far = |z: Complex64, out: &[Complex64]| out.iter().all(|w| (z - w).norm() >= sep) && (z - z.conj()).norm() >= sep;
    while out.len() < n {
        if n - out.len() >= 2 && rng.gen_bool(0.6) {
            let z = cx(-rng.gen_range(0.1..3.0), rng.gen_range(0.5..6.0));
            if far(z, &out) && out.iter().all(|w| (z.conj() - w).norm() >= sep) {
                out.push(z);
                out.push(z.conj());
            }
        } else {
            let z = c(-rng.gen_range(0.2..6.0));
            if out.iter().all(|w| (z - w).norm() >= sep) {
                out.push(z);
            }
        }
    }
    out
}

/// Real block-diagonal matrix with the given spectrum; conjugate pairs must
/// be adjacent with the positive imaginary part first.
pub fn real_block_diagonal(spectrum: &[Complex64]) -> DenseMatrix {
    let n = spectrum.len();
    let mut a = DenseMatrix::zeros(n, n);
    let mut k = 0;
    while k < n {
        let z = spectrum[k];
        if z.im == 0.0 {
            a[(k, k)] = c(z.re);
            k += 1;
        } else {
            a[(k, k)] = c(z.re);
            a[(k + 1, k + 1)] = c(z.re);
            a[(k, k + 1)] = c(z.im);
            a[(k + 1, k)] = c(-z.im);
            k += 2;
        }
    }
    a
}

/// `T·A₀·T⁻¹` for a random well-conditioned real `T`.
pub fn similar(a0: &DenseMatrix, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let n = a0.nrows();
    let mut t = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            t[(i, j)] += c(rng.gen_range(-0.3..0.3));
        }
    }
    t.matmul(a0).matmul(&t.inverse().unwrap())
}

pub fn random_real_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let v: f64 = rng.gen_range(0.3..1.5);
            c(if rng.gen_bool(0.5) { v } else { -v })
        })
        .collect()
}

/// Real state-space system with a known spectrum.
pub fn random_state_space(n: usize, sep: f64, rng: &mut ChaCha8Rng) -> (StateSpaceSystem, Vec<Complex64>) {
    let spectrum = random_spectrum(n, sep, rng);
    let a = similar(&real_block_diagonal(&spectrum), rng);
    let b = random_real_vec(n, rng);
    let cc = random_real_vec(n, rng);
    (StateSpaceSystem::new(a, b, cc, c(0.0)).unwrap(), spectrum)
}

/// Descriptor realization of `a` with `m` algebraic variables:
/// random sparse `J2`, `J3`, `J4` and `J1 = A + J2·J4⁻¹·J3`.
pub fn descriptor_with_state_matrix(
    a: &DenseMatrix,
    m: usize,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> DescriptorSystem {
    let n = a.nrows();
    let order = n + m;
    let mut j2 = DenseMatrix::zeros(n, m);
    let mut j3 = DenseMatrix::zeros(m, n);
    let mut j4 = DenseMatrix::zeros(m, m);
    for i in 0..n {
        for k in 0..m {
            if rng.gen_bool(density) {
                j2[(i, k)] = c(rng.gen_range(-1.0..1.0));
            }
            if rng.gen_bool(density) {
                j3[(k, i)] = c(rng.gen_range(-1.0..1.0));
            }
        }
    }
    for i in 0..m {
        j4[(i, i)] = c(rng.gen_range(2.0..4.0));
        for k in 0..m {
            if i != k && rng.gen_bool(density) {
                j4[(i, k)] = c(rng.gen_range(-1.0..1.0));
            }
        }
    }
    let correction = j2.matmul(&j4.inverse().unwrap().matmul(&j3));
    let mut t = Vec::new();
    for i in 0..n {
        for k in 0..n {
            let v = a[(i, k)] + correction[(i, k)];
            if v != c(0.0) {
                t.push((i, k, v));
            }
        }
        for k in 0..m {
            if j2[(i, k)] != c(0.0) {
                t.push((i, n + k, j2[(i, k)]));
            }
        }
    }
    for i in 0..m {
        for k in 0..n {
            if j3[(i, k)] != c(0.0) {
                t.push((n + i, k, j3[(i, k)]));
            }
        }
        for k in 0..m {
            if j4[(i, k)] != c(0.0) {
                t.push((n + i, n + k, j4[(i, k)]));
            }
        }
    }
    let j = SparseMatrix::from_triplets(order, order, &t).unwrap();
    let b = random_real_vec(order, rng);
    let cc = random_real_vec(order, rng);
    DescriptorSystem::new(j, n, b, cc, c(rng.gen_range(-1.0..1.0))).unwrap()
}

/// Random descriptor system with no prescribed spectrum.
pub fn random_descriptor(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DescriptorSystem {
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            if i == k {
                a[(i, k)] = c(-rng.gen_range(1.0..3.0));
            } else if rng.gen_bool(0.3) {
                a[(i, k)] = c(rng.gen_range(-1.0..1.0));
            }
        }
    }
    descriptor_with_state_matrix(&a, m, 0.3, rng)
}

/// Random point away from the negative real axis region holding the poles.
pub fn random_point(rng: &mut ChaCha8Rng) -> Complex64 {
    cx(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..5.0))
}
