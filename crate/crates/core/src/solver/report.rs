use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Method, SolverConfig};
use crate::oracle::Ranked;

/// `|R| / |Re λ|`; purely imaginary poles get `f64::INFINITY`.
pub fn dominance(residue: Complex64, eigenvalue: Complex64) -> f64 {
    if eigenvalue.re == 0.0 {
        f64::INFINITY
    } else {
        residue.norm() / eigenvalue.re.abs()
    }
}

/// `−Re λ / |λ|`, taken as 0 at the origin.
pub fn damping_ratio(eigenvalue: Complex64) -> f64 {
    let r = eigenvalue.norm();
    if r == 0.0 {
        0.0
    } else {
        -eigenvalue.re / r
    }
}

/// A converged eigenpair with its modal data.
#[derive(Debug, Clone)]
pub struct PoleResult {
    pub column: usize,
    pub eigenvalue: Complex64,
    pub right_vector: Vec<Complex64>,
    pub left_vector: Vec<Complex64>,
    pub residue: Complex64,
    pub dominance: f64,
    pub damping_ratio: f64,
    pub iterations: usize,
    /// (right, left) relative residuals at convergence.
    pub final_residuals: (f64, f64),
    pub wall_time_s: f64,
}

impl Ranked for PoleResult {
    fn eigenvalue(&self) -> Complex64 {
        self.eigenvalue
    }

    fn dominance(&self) -> f64 {
        self.dominance
    }
}

impl PoleResult {
    pub fn row(&self) -> PoleRow {
        PoleRow {
            column: self.column,
            re: self.eigenvalue.re,
            im: self.eigenvalue.im,
            residue_re: self.residue.re,
            residue_im: self.residue.im,
            dominance: self.dominance,
            damping_ratio: self.damping_ratio,
            iterations: self.iterations,
            residual_right: self.final_residuals.0,
            residual_left: self.final_residuals.1,
            wall_time_s: self.wall_time_s,
        }
    }
}

/// Serializes non-finite values as the strings `"inf"`, `"-inf"` and `"nan"`,
/// which plain JSON numbers cannot carry.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("nan")
        } else if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("bad number {t:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleRow {
    pub column: usize,
    pub re: f64,
    pub im: f64,
    pub residue_re: f64,
    pub residue_im: f64,
    #[serde(with = "extended_float")]
    pub dominance: f64,
    pub damping_ratio: f64,
    pub iterations: usize,
    pub residual_right: f64,
    pub residual_left: f64,
    pub wall_time_s: f64,
}

impl PoleRow {
    pub fn eigenvalue(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconvergedColumn {
    pub column: usize,
    pub last_shift: Complex64,
    pub iterations: usize,
    #[serde(with = "extended_float")]
    pub residual_right: f64,
    #[serde(with = "extended_float")]
    pub residual_left: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Event {
    /// Two active shifts closer than the collision threshold.
    Collision {
        iteration: usize,
        column: usize,
        from: Complex64,
        to: Complex64,
    },
    /// `J − sE` was singular at the shift.
    SingularShift {
        iteration: usize,
        column: usize,
        from: Complex64,
        to: Complex64,
    },
    /// The normalizer was below the collision threshold.
    VanishingNormalizer {
        iteration: usize,
        column: usize,
        from: Complex64,
        to: Complex64,
    },
    /// `YᵀEX` condition estimate above `1/collision_eps`.
    IllConditionedProjection {
        iteration: usize,
        #[serde(with = "extended_float")]
        condition: f64,
    },
    Converged {
        iteration: usize,
        column: usize,
        eigenvalue: Complex64,
    },
    /// The column could not be recomputed at `shift` and was frozen at its
    /// last valid vectors; it is reported as unconverged.
    Stalled {
        iteration: usize,
        column: usize,
        shift: Complex64,
        reason: String,
    },
    /// `yᵀEx` vanished for a converged column; its residue is reported as 0.
    VanishingInnerProduct {
        iteration: usize,
        column: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuplicateKind {
    Exact,
    Conjugate,
}

/// Two converged columns that found the same eigenvalue or a conjugate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duplicate {
    pub first: usize,
    pub second: usize,
    pub kind: DuplicateKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub config: SolverConfig,
    pub initial_shifts: Vec<Complex64>,
    /// Converged poles, most dominant first.
    pub poles: Vec<PoleRow>,
    pub unconverged: Vec<UnconvergedColumn>,
    pub converged_all: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
    /// Converged eigenvalues with positive imaginary part.
    pub upper_half_plane: usize,
    pub duplicates: Vec<Duplicate>,
    pub events: Vec<Event>,
    /// `trajectories[k]` is the shift tuple after iteration `k`
    /// (`trajectories[0]` is the starting tuple).
    pub trajectories: Vec<Vec<Complex64>>,
}

pub(crate) fn find_duplicates(poles: &[PoleRow]) -> Vec<Duplicate> {
    let mut out = Vec::new();
    let close = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-6 * a.norm().max(1.0);
    for (i, a) in poles.iter().enumerate() {
        for b in &poles[i + 1..] {
            let (la, lb) = (a.eigenvalue(), b.eigenvalue());
            let kind = if close(la, lb) {
                Some(DuplicateKind::Exact)
            } else if la.im != 0.0 && close(la, lb.conj()) {
                Some(DuplicateKind::Conjugate)
            } else {
                None
            };
            if let Some(kind) = kind {
                out.push(Duplicate {
                    first: a.column.min(b.column),
                    second: a.column.max(b.column),
                    kind,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_values() {
        let lam = Complex64::new(-0.0335, 1.0787);
        let r = Complex64::new(760.11 * 0.0335, 0.0);
        assert!((dominance(r, lam) - 760.11).abs() < 1e-9);
        assert_eq!(dominance(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)), 1.0);
        assert!(dominance(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).is_infinite());
        assert!(dominance(Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)).is_infinite());
    }

    #[test]
    fn damping_values() {
        assert!((damping_ratio(Complex64::new(-0.0335, 1.0787)) - 0.0310).abs() < 5e-5);
        assert_eq!(damping_ratio(Complex64::new(-3.0, 0.0)), 1.0);
    }
}
