use dpse_core::solver::{damping_ratio, RunReport};
use dpse_core::Complex64;

pub const HEADER: &str = "re,im,dominance,damping_ratio,converged\n";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapRow {
    pub eigenvalue: Complex64,
    /// NaN for unconverged columns.
    pub dominance: f64,
    pub damping_ratio: f64,
    pub converged: bool,
}

/// Converged poles, then (optionally) the last shifts of unconverged columns.
pub fn rows(report: &RunReport, include_unconverged: bool) -> Vec<MapRow> {
    let mut out: Vec<MapRow> = report
        .poles
        .iter()
        .map(|r| MapRow {
            eigenvalue: r.eigenvalue(),
            dominance: r.dominance,
            damping_ratio: r.damping_ratio,
            converged: true,
        })
        .collect();
    if include_unconverged {
        out.extend(report.unconverged.iter().map(|u| MapRow {
            eigenvalue: u.last_shift,
            dominance: f64::NAN,
            damping_ratio: damping_ratio(u.last_shift),
            converged: false,
        }));
    }
    out
}

pub fn to_csv(rows: &[MapRow]) -> String {
    let mut out = String::from(HEADER);
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.eigenvalue.re,
            r.eigenvalue.im,
            r.dominance,
            r.damping_ratio,
            u8::from(r.converged)
        ));
    }
    out
}

/// Rays of constant damping ratio `ζ`: `λ(t) = t·(−ζ + i·√(1 − ζ²))` for
/// `t ∈ [0, radius]`, mirrored into the lower half plane.
pub fn damping_lines(zetas: &[f64], radius: f64, points: usize) -> String {
    let mut out = String::from("zeta,branch,t,re,im\n");
    let steps = points.max(2) - 1;
    for &z in zetas {
        let dir = Complex64::new(-z, (1.0 - z * z).max(0.0).sqrt());
        for (branch, sign) in [("upper", 1.0), ("lower", -1.0)] {
            for k in 0..=steps {
                let t = radius * k as f64 / steps as f64;
                out.push_str(&format!("{z},{branch},{t},{},{}\n", t * dir.re, sign * t * dir.im));
            }
        }
    }
    out
}

/// A radius that covers every row, with some margin.
pub fn covering_radius(rows: &[MapRow]) -> f64 {
    let r = rows.iter().map(|r| r.eigenvalue.norm()).fold(0.0, f64::max);
    if r > 0.0 {
        1.1 * r
    } else {
        1.0
    }
}
