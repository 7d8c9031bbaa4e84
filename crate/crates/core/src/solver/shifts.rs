use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default step of the fan pattern, `μ_k = k·(−1/20 + i/2)`.
pub const FAN_SCALE: Complex64 = Complex64 { re: -0.05, im: 0.5 };

/// How the initial shift tuple is laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ShiftPattern {
    /// `μ_k = k·scale` for `k = 1..=p`.
    PaperFan { scale: Complex64 },
    Explicit { shifts: Vec<Complex64> },
    /// `p` points evenly spaced on a circle, offset by half a step so none
    /// sits on the real axis to the right of the centre.
    Ring { center: Complex64, radius: f64 },
}

impl Default for ShiftPattern {
    fn default() -> Self {
        ShiftPattern::PaperFan { scale: FAN_SCALE }
    }
}

pub fn init_shifts(pattern: &ShiftPattern, p: usize) -> Vec<Complex64> {
    match pattern {
        ShiftPattern::PaperFan { scale } => (1..=p).map(|k| scale * k as f64).collect(),
        ShiftPattern::Explicit { shifts } => shifts.clone(),
        ShiftPattern::Ring { center, radius } => (0..p)
            .map(|k| {
                let theta = 2.0 * PI * (k as f64 + 0.5) / p as f64;
                center + Complex64::from_polar(*radius, theta)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Matching {
    #[default]
    GreedyNearest,
    OptimalAssignment,
}

/// Reorders `candidates` so that entry `i` is the candidate assigned to `old[i]`.
pub fn match_shifts(old: &[Complex64], candidates: &[Complex64], strategy: Matching) -> Vec<Complex64> {
    assert_eq!(old.len(), candidates.len(), "shift tuples must have equal length");
    let assignment = match strategy {
        Matching::GreedyNearest => greedy(old, candidates),
        Matching::OptimalAssignment => hungarian(old, candidates),
    };
    assignment.into_iter().map(|k| candidates[k]).collect()
}

/// `out[i]` = index of the candidate given to `old[i]`.
fn greedy(old: &[Complex64], candidates: &[Complex64]) -> Vec<usize> {
    let n = old.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, o) in old.iter().enumerate() {
        for (k, c) in candidates.iter().enumerate() {
            pairs.push(((o - c).norm(), k, i));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (_, k, i) in pairs {
        if out[i] == usize::MAX && !taken[k] {
            out[i] = k;
            taken[k] = true;
        }
    }
    out
}

/// Minimum total distance assignment (Kuhn–Munkres with potentials).
fn hungarian(old: &[Complex64], candidates: &[Complex64]) -> Vec<usize> {
    let n = old.len();
    let cost = |i: usize, k: usize| (old[i] - candidates[k]).norm();
    // 1-based rows/columns, index 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[owner[j] - 1] = j - 1;
    }
    out
}
