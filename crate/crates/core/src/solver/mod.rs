//! The DPSE and DDPSE fixed-point iterations.
//!
//! Each iteration factorizes `J − s_j E` once per active shift, forms the
//! normalized columns `x_j`, `y_j`, assembles the `p×p` projected matrix `F`
//! and takes either its spectrum (DPSE) or its diagonal (DDPSE) as the next
//! shift tuple. A column converges when the residuals of its previous vectors
//! against the new shift both drop below `tol`; it is then locked and its
//! vectors stay in the projection for the rest of the run.

mod report;
mod shifts;
mod state;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dense::{DenseError, DenseMatrix};
use crate::descriptor::{DescriptorSystem, ModelError, NormalizedVectors};
use crate::oracle::rank_by_dominance;

pub use report::{
    damping_ratio, dominance, Duplicate, DuplicateKind, Event, PoleResult, PoleRow, RunReport, UnconvergedColumn,
};
pub use shifts::{init_shifts, match_shifts, Matching, ShiftPattern, FAN_SCALE};
pub use state::{
    assemble_projection, check_convergence, ddpse_step, deflate, dpse_step, estimate_residue, gram_matrix, stall,
    ColumnResidual, ColumnStatus, ShiftState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dpse,
    Ddpse,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dpse => "dpse",
            Method::Ddpse => "ddpse",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dpse" => Ok(Method::Dpse),
            "ddpse" => Ok(Method::Ddpse),
            other => Err(format!("unknown method {other:?} (expected dpse or ddpse)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    pub p: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub matching: Matching,
    pub collision_eps: f64,
    pub perturbation: f64,
    pub start: ShiftPattern,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Dpse,
            p: 20,
            tol: 1e-5,
            max_iter: 50,
            matching: Matching::GreedyNearest,
            collision_eps: 1e-8,
            perturbation: 1e-6,
            start: ShiftPattern::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: String| Err(SolverError::Config(m));
        if self.p == 0 {
            return fail("p must be at least 1".into());
        }
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.collision_eps > 0.0) {
            return fail(format!("collision_eps must be positive, got {}", self.collision_eps));
        }
        if !(self.perturbation > 0.0) {
            return fail(format!("perturbation must be positive, got {}", self.perturbation));
        }
        if let ShiftPattern::Explicit { shifts } = &self.start {
            if shifts.len() != self.p {
                return fail(format!("{} explicit shifts given but p = {}", shifts.len(), self.p));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error("projection YᵀEX is ill-conditioned (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("yᵀEx vanishes for column {column}")]
    VanishingInnerProduct { column: usize },
    #[error("column {column} is already deflated")]
    DoubleDeflation { column: usize },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Converged poles, most dominant first.
    pub poles: Vec<PoleResult>,
    pub report: RunReport,
}

/// Attempts at separating shifts when `YᵀEX` is ill-conditioned.
const CONDITION_ATTEMPTS: usize = 3;
/// Attempts at computing one column before giving up on it.
const COLUMN_ATTEMPTS: usize = 4;

struct Column {
    index: usize,
    result: Result<NormalizedVectors, ModelError>,
    events: Vec<Event>,
    elapsed: f64,
}

/// Computes the column for shift `s`, perturbing it away from eigenvalues and
/// transmission zeros.
fn compute_column(sys: &DescriptorSystem, index: usize, s: Complex64, config: &SolverConfig, iteration: usize) -> Column {
    let t0 = Instant::now();
    let dir = Complex64::new(1.0, 1.0);
    let mut events = Vec::new();
    let mut s = s;
    let mut singular_retried = false;
    let mut attempt = 0;
    let result = loop {
        attempt += 1;
        match sys.normalized_vectors(s) {
            Ok(v) if v.normalizer.norm() > config.collision_eps * v.normalizer_scale => break Ok(v),
            Ok(v) if attempt >= COLUMN_ATTEMPTS => {
                break Err(ModelError::VanishingNormalizer {
                    s,
                    magnitude: v.normalizer.norm(),
                })
            }
            Err(e @ ModelError::VanishingNormalizer { .. }) if attempt >= COLUMN_ATTEMPTS => break Err(e),
            Ok(_) | Err(ModelError::VanishingNormalizer { .. }) => {
                let to = s + dir * config.perturbation;
                events.push(Event::VanishingNormalizer {
                    iteration,
                    column: index,
                    from: s,
                    to,
                });
                s = to;
            }
            Err(ModelError::SingularShift { .. }) if !singular_retried => {
                singular_retried = true;
                let scale = if s.norm() > 0.0 { s.norm() } else { 1.0 };
                let to = s + dir * (config.perturbation * scale);
                events.push(Event::SingularShift {
                    iteration,
                    column: index,
                    from: s,
                    to,
                });
                s = to;
            }
            Err(e) => break Err(e),
        }
    };
    Column {
        index,
        result,
        events,
        elapsed: t0.elapsed().as_secs_f64(),
    }
}

fn refresh(
    sys: &DescriptorSystem,
    columns: &[usize],
    shifts: &[Complex64],
    config: &SolverConfig,
    iteration: usize,
) -> Vec<Column> {
    columns
        .par_iter()
        .map(|&j| compute_column(sys, j, shifts[j], config, iteration))
        .collect()
}

/// Moves active shifts that sit within `collision_eps` of an earlier shift or
/// a locked eigenvalue.
fn separate_collisions(
    shifts: &mut [Complex64],
    active: &[bool],
    config: &SolverConfig,
    iteration: usize,
    events: &mut Vec<Event>,
) {
    let dir = Complex64::new(1.0, 1.0) * config.perturbation;
    for j in 0..shifts.len() {
        if !active[j] {
            continue;
        }
        let mut guard = 0;
        while guard < 16 {
            let clash = (0..shifts.len())
                .filter(|&i| i != j && (i < j || !active[i]))
                .any(|i| (shifts[i] - shifts[j]).norm() <= config.collision_eps);
            if !clash {
                break;
            }
            let to = shifts[j] + dir;
            events.push(Event::Collision {
                iteration,
                column: j,
                from: shifts[j],
                to,
            });
            shifts[j] = to;
            guard += 1;
        }
    }
}

/// Condition of `YᵀEX` after scaling every column and row to unit length,
/// which makes it independent of how `B` and `C` are scaled.
fn scaled_gram_condition(sys: &DescriptorSystem, state: &ShiftState) -> f64 {
    let n = sys.ndyn();
    let g = gram_matrix(sys, state);
    let nx: Vec<f64> = state.xs.iter().map(|x| norm(&x[..n])).collect();
    let ny: Vec<f64> = state.ys.iter().map(|y| norm(&y[..n])).collect();
    let p = state.p();
    let mut scaled = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            scaled[(i, j)] = g[(i, j)] / (ny[i] * nx[j]);
        }
    }
    if !scaled.is_finite() {
        return f64::INFINITY;
    }
    scaled.condition_estimate()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Closest pair of shifts with at least one active member; returns the
/// active column to move.
fn closest_active(state: &ShiftState) -> Option<usize> {
    let p = state.p();
    let mut best: Option<(f64, usize)> = None;
    for i in 0..p {
        for j in i + 1..p {
            let pick = if state.is_active(j) {
                j
            } else if state.is_active(i) {
                i
            } else {
                continue;
            };
            let d = (state.vector_shifts[i] - state.vector_shifts[j]).norm();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, pick));
            }
        }
    }
    best.map(|(_, j)| j)
}

fn stall_column(
    state: &mut ShiftState,
    j: usize,
    shift: Complex64,
    error: ModelError,
    iteration: usize,
    events: &mut Vec<Event>,
) -> Result<(), SolverError> {
    stall(state, j)?;
    events.push(Event::Stalled {
        iteration,
        column: j,
        shift,
        reason: error.to_string(),
    });
    Ok(())
}

/// Shift tuples of one undeflated step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// Shifts the columns were actually computed at; differs from the
    /// requested tuple only where a singular shift or vanishing normalizer
    /// forced a perturbation.
    pub used: Vec<Complex64>,
    pub next: Vec<Complex64>,
}

/// One step from an arbitrary tuple with every column active, using the
/// same shift recovery as [`run`] but no deflation or collision handling.
pub fn step(sys: &DescriptorSystem, shifts: &[Complex64], config: &SolverConfig) -> Result<Step, SolverError> {
    let all: Vec<usize> = (0..shifts.len()).collect();
    let cols = refresh(sys, &all, shifts, config, 0)
        .into_iter()
        .map(|c| c.result)
        .collect::<Result<Vec<_>, _>>()?;
    let state = ShiftState::from_columns(cols);
    let f = assemble_projection(sys, &state)?;
    let next = match config.method {
        Method::Dpse => dpse_step(&state, &f, config.matching)?,
        Method::Ddpse => ddpse_step(&state, &f),
    };
    Ok(Step {
        used: state.vector_shifts,
        next,
    })
}

/// `iters` successive [`step`]s from `start`.
pub fn iterate(
    sys: &DescriptorSystem,
    start: &[Complex64],
    iters: usize,
    config: &SolverConfig,
) -> Result<Vec<Step>, SolverError> {
    let mut s = start.to_vec();
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let st = step(sys, &s, config)?;
        s = st.next.clone();
        out.push(st);
    }
    Ok(out)
}

/// Runs the configured iteration until every column converges or
/// `max_iter` steps have been taken.
///
/// Columns still active at the end are listed in `report.unconverged`; that is
/// not an error.
pub fn run(sys: &DescriptorSystem, config: &SolverConfig) -> Result<RunOutcome, SolverError> {
    config.validate()?;
    let t_run = Instant::now();
    let p = config.p;
    let initial = init_shifts(&config.start, p);
    let mut events = Vec::new();
    let mut col_time = vec![0.0; p];
    let mut iterations = vec![0usize; p];
    let mut last_residual = vec![(f64::INFINITY, f64::INFINITY); p];

    let mut shifts = initial.clone();
    separate_collisions(&mut shifts, &vec![true; p], config, 0, &mut events);
    let mut cols: Vec<Option<NormalizedVectors>> = vec![None; p];
    for c in refresh(sys, &(0..p).collect::<Vec<_>>(), &shifts, config, 0) {
        events.extend(c.events);
        col_time[c.index] += c.elapsed;
        cols[c.index] = Some(c.result?);
    }
    let mut state = ShiftState::from_columns(cols.into_iter().map(|c| c.expect("all columns computed")).collect());
    let mut trajectories = vec![state.shifts.clone()];
    let mut poles: Vec<PoleResult> = Vec::new();

    let mut k = 0;
    while k < config.max_iter && !state.active().is_empty() {
        k += 1;
        state.iter = k;

        let mut condition = scaled_gram_condition(sys, &state);
        let mut attempts = 0;
        while condition > 1.0 / config.collision_eps && attempts < CONDITION_ATTEMPTS {
            attempts += 1;
            let Some(j) = closest_active(&state) else { break };
            let to = state.vector_shifts[j] + Complex64::new(1.0, 1.0) * config.perturbation;
            events.push(Event::Collision {
                iteration: k,
                column: j,
                from: state.vector_shifts[j],
                to,
            });
            let c = compute_column(sys, j, to, config, k);
            events.extend(c.events);
            col_time[j] += c.elapsed;
            match c.result {
                Ok(v) => state.set_column(j, v),
                Err(e) => stall_column(&mut state, j, to, e, k, &mut events)?,
            }
            condition = scaled_gram_condition(sys, &state);
        }
        if condition > 1.0 / config.collision_eps {
            events.push(Event::IllConditionedProjection { iteration: k, condition });
        }

        let f = match assemble_projection(sys, &state) {
            Ok(f) => f,
            Err(SolverError::IllConditioned { condition }) => {
                events.push(Event::IllConditionedProjection { iteration: k, condition });
                break;
            }
            Err(e) => return Err(e),
        };
        let mut next = match config.method {
            Method::Dpse => dpse_step(&state, &f, config.matching)?,
            Method::Ddpse => ddpse_step(&state, &f),
        };
        for j in state.active() {
            if !next[j].is_finite() {
                next[j] = state.vector_shifts[j] + Complex64::new(1.0, 1.0) * config.perturbation;
            }
        }
        trajectories.push(next.clone());

        let checks = check_convergence(sys, &state, &next, config.tol);
        for (j, check) in checks.iter().enumerate() {
            let Some(r) = check else { continue };
            iterations[j] = k;
            last_residual[j] = (r.right, r.left);
            if !r.converged {
                continue;
            }
            let eigenvalue = next[j];
            let residue = match estimate_residue(sys, &state, j) {
                Ok(r) => r,
                Err(_) => {
                    events.push(Event::VanishingInnerProduct { iteration: k, column: j });
                    Complex64::new(0.0, 0.0)
                }
            };
            deflate(&mut state, j, eigenvalue)?;
            events.push(Event::Converged {
                iteration: k,
                column: j,
                eigenvalue,
            });
            let m = dominance(residue, eigenvalue);
            poles.push(PoleResult {
                column: j,
                eigenvalue,
                right_vector: state.xs[j].clone(),
                left_vector: state.ys[j].clone(),
                residue,
                dominance: m,
                damping_ratio: damping_ratio(eigenvalue),
                iterations: k,
                final_residuals: (r.right, r.left),
                wall_time_s: col_time[j],
            });
        }

        let active = state.active();
        if active.is_empty() || k == config.max_iter {
            for &j in &active {
                state.shifts[j] = next[j];
            }
            break;
        }
        let mask: Vec<bool> = (0..p).map(|j| state.is_active(j)).collect();
        let mut moved = next;
        separate_collisions(&mut moved, &mask, config, k, &mut events);
        for c in refresh(sys, &active, &moved, config, k) {
            events.extend(c.events);
            col_time[c.index] += c.elapsed;
            match c.result {
                Ok(v) => state.set_column(c.index, v),
                Err(e) => stall_column(&mut state, c.index, moved[c.index], e, k, &mut events)?,
            }
        }
    }

    let unconverged: Vec<UnconvergedColumn> = (0..p)
        .filter(|&j| state.status[j] != ColumnStatus::Converged)
        .map(|j| UnconvergedColumn {
            column: j,
            last_shift: state.shifts[j],
            iterations: iterations[j],
            residual_right: last_residual[j].0,
            residual_left: last_residual[j].1,
        })
        .collect();
    let poles = rank_by_dominance(poles);
    let rows: Vec<PoleRow> = poles.iter().map(PoleResult::row).collect();
    let report = RunReport {
        method: config.method,
        config: config.clone(),
        initial_shifts: initial,
        upper_half_plane: rows.iter().filter(|r| r.im > 0.0).count(),
        duplicates: report::find_duplicates(&rows),
        converged_all: unconverged.is_empty(),
        poles: rows,
        unconverged,
        iterations: k,
        wall_time_s: t_run.elapsed().as_secs_f64(),
        events,
        trajectories,
    };
    Ok(RunOutcome { poles, report })
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

    fn explicit(method: Method, shifts: Vec<Complex64>) -> SolverConfig {
        SolverConfig {
            method,
            p: shifts.len(),
            start: ShiftPattern::Explicit { shifts },
            ..SolverConfig::default()
        }
    }

    #[test]
    fn worked_example_converges_quickly() {
        let out = run(&diag13(), &explicit(Method::Dpse, vec![c(-0.5), c(-2.5)])).unwrap();
        assert!(out.report.converged_all);
        assert!(out.report.iterations <= 3);
        let mut ev: Vec<f64> = out.poles.iter().map(|p| p.eigenvalue.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 3.0).abs() < 1e-9 && (ev[1] + 1.0).abs() < 1e-9);
        // sorted by dominance: m(−1) = 1 > m(−3) = 1/3
        assert!((out.poles[0].eigenvalue - c(-1.0)).norm() < 1e-9);
        assert!((out.poles[0].residue - c(1.0)).norm() < 1e-4);
        assert!(out.poles.iter().all(|p| p.final_residuals.0 <= 1e-5 && p.final_residuals.1 <= 1e-5));
        assert!(out.report.events.iter().any(|e| matches!(e, Event::SingularShift { .. })));
    }

    #[test]
    fn config_checks() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.p = 0;
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig {
            p: 3,
            start: ShiftPattern::Explicit { shifts: vec![c(1.0)] },
            ..SolverConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(SolverError::Config(_))));
        assert!(SolverConfig { tol: 0.0, ..SolverConfig::default() }.validate().is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("DPSE".parse::<Method>().unwrap(), Method::Dpse);
        assert_eq!("ddpse".parse::<Method>().unwrap(), Method::Ddpse);
        assert!("qr".parse::<Method>().is_err());
        assert_eq!(Method::Ddpse.to_string(), "ddpse");
    }

    #[test]
    fn identical_initial_shifts_are_separated() {
        let out = run(&diag13(), &explicit(Method::Ddpse, vec![c(-0.5), c(-0.5)])).unwrap();
        assert!(out.report.events.iter().any(|e| matches!(e, Event::Collision { .. })));
        assert_ne!(out.report.trajectories[0][0], out.report.trajectories[0][1]);
    }
}
