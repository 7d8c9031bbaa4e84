//! Side-by-side method comparison,
//! one block per method with `k`, `ITER` and `CPU` (wall seconds at
//! convergence) per converged value, sorted by iteration count.

use dpse_core::solver::{run, SolverConfig};
use dpse_core::{Complex64, DescriptorSystem, Method};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// 1-based column index.
    pub k: usize,
    pub iterations: usize,
    /// Minimum over repeats of the wall time at which the column converged.
    pub cpu: f64,
    pub eigenvalue: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchBlock {
    pub method: Method,
    pub p: usize,
    pub repeats: usize,
    pub rows: Vec<BenchRow>,
    pub upper_half_plane: usize,
    pub iterations: usize,
    /// Minimum total wall time over repeats.
    pub wall_time_s: f64,
}

/// Runs every method `repeats` times from the shifts in `base`.
pub fn bench(
    sys: &DescriptorSystem,
    base: &SolverConfig,
    methods: &[Method],
    repeats: usize,
) -> Result<Vec<BenchBlock>, CliError> {
    if repeats == 0 {
        return Err(CliError::usage("repeats must be at least 1"));
    }
    let mut blocks = Vec::with_capacity(methods.len());
    for &method in methods {
        let config = SolverConfig {
            method,
            ..base.clone()
        };
        let mut block: Option<BenchBlock> = None;
        for _ in 0..repeats {
            let report = run(sys, &config)?.report;
            let mut rows: Vec<BenchRow> = report
                .poles
                .iter()
                .map(|r| BenchRow {
                    k: r.column + 1,
                    iterations: r.iterations,
                    cpu: r.wall_time_s,
                    eigenvalue: r.eigenvalue(),
                })
                .collect();
            match block.as_mut() {
                None => {
                    rows.sort_by_key(|r| r.k);
                    block = Some(BenchBlock {
                        method,
                        p: config.p,
                        repeats,
                        rows,
                        upper_half_plane: report.upper_half_plane,
                        iterations: report.iterations,
                        wall_time_s: report.wall_time_s,
                    });
                }
                Some(b) => {
                    for row in &mut b.rows {
                        if let Some(r) = rows.iter().find(|r| r.k == row.k) {
                            row.cpu = row.cpu.min(r.cpu);
                        }
                    }
                    b.wall_time_s = b.wall_time_s.min(report.wall_time_s);
                }
            }
        }
        let mut b = block.expect("repeats >= 1");
        b.rows.sort_by(|x, y| x.iterations.cmp(&y.iterations).then(x.cpu.total_cmp(&y.cpu)).then(x.k.cmp(&y.k)));
        blocks.push(b);
    }
    Ok(blocks)
}

pub fn format_table(blocks: &[BenchBlock]) -> String {
    let mut out = String::new();
    for b in blocks {
        out.push_str(&format!("# {} (p = {}, repeats = {})\n", b.method.to_string().to_uppercase(), b.p, b.repeats));
        out.push_str(&format!("{:>5} {:>6} {:>12} {:>14} {:>14}\n", "k", "ITER", "CPU", "re", "im"));
        for r in &b.rows {
            out.push_str(&format!(
                "{:>5} {:>6} {:>12.6} {:>14.6} {:>14.6}\n",
                r.k, r.iterations, r.cpu, r.eigenvalue.re, r.eigenvalue.im
            ));
        }
        out.push_str(&format!(
            "# converged {}/{}, upper half-plane {}, iterations {}, wall {:.6} s\n\n",
            b.rows.len(),
            b.p,
            b.upper_half_plane,
            b.iterations,
            b.wall_time_s
        ));
    }
    out
}

pub fn to_csv(blocks: &[BenchBlock]) -> String {
    let mut out = String::from("method,k,iter,cpu,re,im\n");
    for b in blocks {
        for r in &b.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                b.method, r.k, r.iterations, r.cpu, r.eigenvalue.re, r.eigenvalue.im
            ));
        }
    }
    out
}
