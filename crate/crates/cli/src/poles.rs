use std::fs;
use std::io::Write;
use std::path::Path;

use dpse_core::solver::{run, Matching, RunReport, ShiftPattern, SolverConfig};
use dpse_core::{Complex64, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{exit, CliError};
use crate::manifest::{LoadedSystem, Manifest};
use crate::parse::{parse_shift_spec, ShiftSpec};

/// Solver settings as given on the command line.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub method: Method,
    /// Defaults to the number of explicit shifts, else 20.
    pub p: Option<usize>,
    pub shifts: String,
    pub fan_scale: Complex64,
    pub tol: f64,
    pub max_iter: usize,
    pub matching: Matching,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        let d = SolverConfig::default();
        RunOptions {
            method: d.method,
            p: None,
            shifts: "paper-fan".into(),
            fan_scale: dpse_core::solver::FAN_SCALE,
            tol: d.tol,
            max_iter: d.max_iter,
            matching: d.matching,
            seed: 0,
        }
    }
}

impl RunOptions {
    /// Resolves the shift pattern (reading the ground truth if needed).
    pub fn config(&self, manifest: &Manifest) -> Result<SolverConfig, CliError> {
        let spec = parse_shift_spec(&self.shifts, self.fan_scale)?;
        let (p, start) = match spec {
            ShiftSpec::Pattern(ShiftPattern::Explicit { shifts }) => {
                let p = self.p.unwrap_or(shifts.len());
                (p, ShiftPattern::Explicit { shifts })
            }
            ShiftSpec::Pattern(pattern) => (self.p.unwrap_or(20), pattern),
            ShiftSpec::Truth { offset } => {
                let p = self.p.unwrap_or(20);
                let truth = manifest
                    .ground_truth()?
                    .ok_or_else(|| CliError::usage("truth shifts need a manifest with ground_truth_path"))?;
                let eigenvalues: Vec<Complex64> = truth.residues.iter().map(|e| e.eigenvalue).collect();
                (p, ShiftPattern::Explicit {
                    shifts: truth_shifts(&eigenvalues, p, offset, self.seed)?,
                })
            }
        };
        let config = SolverConfig {
            method: self.method,
            p,
            tol: self.tol,
            max_iter: self.max_iter,
            matching: self.matching,
            start,
            ..SolverConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

/// The first `p` eigenvalues, each moved by `offset` in a seeded direction.
pub fn truth_shifts(eigenvalues: &[Complex64], p: usize, offset: f64, seed: u64) -> Result<Vec<Complex64>, CliError> {
    if p > eigenvalues.len() {
        return Err(CliError::usage(format!(
            "p = {p} exceeds the {} known eigenvalues",
            eigenvalues.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(eigenvalues[..p]
        .iter()
        .map(|&z| z + Complex64::from_polar(offset, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect())
}

pub fn solve(loaded: &LoadedSystem, opts: &RunOptions) -> Result<RunReport, CliError> {
    let config = opts.config(&loaded.manifest)?;
    Ok(run(&loaded.system, &config)?.report)
}

pub fn exit_code(report: &RunReport) -> i32 {
    if report.converged_all {
        exit::OK
    } else {
        exit::PARTIAL
    }
}

/// Converged poles as CSV, most dominant first.
pub fn poles_csv(report: &RunReport) -> String {
    let mut out = String::from(
        "column,re,im,residue_re,residue_im,dominance,damping_ratio,iterations,residual_right,residual_left,wall_time_s\n",
    );
    for r in &report.poles {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.column,
            r.re,
            r.im,
            r.residue_re,
            r.residue_im,
            r.dominance,
            r.damping_ratio,
            r.iterations,
            r.residual_right,
            r.residual_left,
            r.wall_time_s
        ));
    }
    out
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes the JSON report to `out` (or `stdout`) and the optional CSV.
pub fn emit(
    report: &RunReport,
    out: Option<&Path>,
    csv: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report)? + "\n";
    match out {
        Some(path) => write_file(path, &json)?,
        None => stdout
            .write_all(json.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))?,
    }
    if let Some(path) = csv {
        write_file(path, &poles_csv(report))?;
    }
    Ok(())
}
