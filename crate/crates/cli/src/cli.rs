use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dpse_core::solver::{Matching, RunReport};
use dpse_core::{Complex64, Method};

use crate::error::{exit, CliError};
use crate::gen::{generate, GenOptions};
use crate::manifest;
use crate::parse::{parse_complex, parse_complex_list};
use crate::poles::{self, RunOptions};
use crate::{bench, polemap, spy, tf};

#[derive(Debug, Parser)]
#[command(name = "dpse", version, about = "Dominant poles of large sparse descriptor systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver and write a JSON report.
    Poles(PolesArgs),
    /// Sample the transfer function.
    Tf(TfArgs),
    /// Generate a synthetic system with a known spectrum.
    Gen(GenArgs),
    /// Compare methods from identical starting shifts.
    Bench(BenchArgs),
    /// Summarize the sparsity pattern of J.
    Spy(SpyArgs),
    /// Turn a run report into pole-map plot data.
    Polemap(PolemapArgs),
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn matching_arg(s: &str) -> Result<Matching, String> {
    match s {
        "greedy" | "greedy-nearest" => Ok(Matching::GreedyNearest),
        "optimal" | "optimal-assignment" => Ok(Matching::OptimalAssignment),
        other => Err(format!("unknown matching {other:?} (expected greedy or optimal)")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value = "dpse")]
    pub method: Method,
    /// Number of simultaneous shifts (default: number of explicit shifts, else 20).
    #[arg(long)]
    pub p: Option<usize>,
    /// paper-fan, ring:<center>:<radius>, truth[:<offset>], or a comma-separated list.
    #[arg(long, default_value = "paper-fan", allow_hyphen_values = true)]
    pub shifts: String,
    /// Step of the fan pattern.
    #[arg(long, default_value = "-0.05+0.5i", value_parser = complex_arg, allow_hyphen_values = true)]
    pub fan_scale: Complex64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    #[arg(long, default_value = "greedy", value_parser = matching_arg)]
    pub matching: Matching,
    /// Seed for randomized shift patterns.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn options(&self) -> RunOptions {
        RunOptions {
            method: self.method,
            p: self.p,
            shifts: self.shifts.clone(),
            fan_scale: self.fan_scale,
            tol: self.tol,
            max_iter: self.max_iter,
            matching: self.matching,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct PolesArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the converged poles as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TfArgs {
    pub manifest: PathBuf,
    /// Comma-separated sample points.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "sweep", required_unless_present = "sweep")]
    pub s: Option<String>,
    /// Log-spaced s = iω sweep, given as w_min:w_max:n.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Add the k-term modal approximant and its relative error.
    #[arg(long)]
    pub compare_modal: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 60)]
    pub n_states: usize,
    #[arg(long, default_value_t = 40)]
    pub n_algebraic: usize,
    /// Number of conjugate pairs.
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    /// Damping-ratio range of the pairs, lo:hi.
    #[arg(long, default_value = "0.01:0.3")]
    pub damping_range: String,
    /// Natural-frequency range of the pairs, lo:hi.
    #[arg(long, default_value = "0.5:6")]
    pub frequency_range: String,
    /// Range of |λ| for real eigenvalues, lo:hi.
    #[arg(long, default_value = "0.5:10")]
    pub real_range: String,
    #[arg(long, default_value_t = 0.1)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.05)]
    pub density: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Prescribed spectrum (comma-separated), overriding the sampled one.
    #[arg(long, allow_hyphen_values = true)]
    pub eigenvalues: Option<String>,
    /// Use B = C = ones.
    #[arg(long)]
    pub unit_io: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub manifest: PathBuf,
    /// Comma-separated methods.
    #[arg(long, default_value = "ddpse,dpse", value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write the rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpyArgs {
    pub manifest: PathBuf,
    /// Print only the summary, not the coordinates.
    #[arg(long)]
    pub summary_only: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolemapArgs {
    /// JSON report written by `poles`.
    pub report: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also emit the last shifts of unconverged columns.
    #[arg(long)]
    pub include_unconverged: bool,
    /// Write constant-damping rays to this file.
    #[arg(long)]
    pub lines: Option<PathBuf>,
    #[arg(long, default_value = "0.05,0.1,0.2", value_delimiter = ',')]
    pub zeta: Vec<f64>,
}

fn range_arg(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("{what} must look like lo:hi, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn emit(out: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => poles::write_file(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

impl GenArgs {
    pub fn options(&self) -> Result<GenOptions, CliError> {
        Ok(GenOptions {
            n_states: self.n_states,
            n_algebraic: self.n_algebraic,
            pairs: self.pairs,
            damping: range_arg(&self.damping_range, "damping range")?,
            frequency: range_arg(&self.frequency_range, "frequency range")?,
            real_range: range_arg(&self.real_range, "real range")?,
            separation: self.separation,
            density: self.density,
            seed: self.seed,
            eigenvalues: self.eigenvalues.as_deref().map(parse_complex_list).transpose()?,
            unit_io: self.unit_io,
        })
    }
}

/// Runs one subcommand and returns its exit code. Errors go to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit::INPUT
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Poles(a) => {
            let loaded = manifest::load(&a.manifest)?;
            let report = poles::solve(&loaded, &a.solver.options())?;
            poles::emit(&report, a.out.as_deref(), a.csv.as_deref(), stdout)?;
            let _ = writeln!(
                stderr,
                "converged {}/{} in {} iterations",
                report.poles.len(),
                report.config.p,
                report.iterations
            );
            Ok(poles::exit_code(&report))
        }
        Command::Tf(a) => {
            let loaded = manifest::load(&a.manifest)?;
            let points = match (&a.s, &a.sweep) {
                (Some(s), _) => parse_complex_list(s)?,
                (None, Some(sweep)) => tf::parse_sweep(sweep)?,
                (None, None) => return Err(CliError::usage("give --s or --sweep")),
            };
            let table = tf::sample(&loaded.system, &points, a.compare_modal)?;
            for s in &table.skipped {
                let _ = writeln!(stderr, "warning: skipped s = {s}, which is a pole");
            }
            if let Some(e) = table.max_relative_error() {
                let _ = writeln!(stderr, "max relative modal error {e:e}");
            }
            emit(a.out.as_ref(), &table.to_csv(), stdout)?;
            Ok(exit::OK)
        }
        Command::Gen(a) => {
            let generated = generate(&a.options()?)?;
            let path = generated.write(&a.out_dir)?;
            let _ = writeln!(stdout, "{}", path.display());
            Ok(exit::OK)
        }
        Command::Bench(a) => {
            let loaded = manifest::load(&a.manifest)?;
            let config = a.solver.options().config(&loaded.manifest)?;
            let blocks = bench::bench(&loaded.system, &config, &a.methods, a.repeats)?;
            emit(None, &bench::format_table(&blocks), stdout)?;
            if let Some(p) = &a.csv {
                poles::write_file(p, &bench::to_csv(&blocks))?;
            }
            Ok(exit::OK)
        }
        Command::Spy(a) => {
            let m = manifest::Manifest::read(&a.manifest)?;
            let j = m.jacobian()?;
            let mut text = spy::summarize(&j, m.ndyn.min(j.nrows())).to_text();
            if !a.summary_only {
                text.push_str(&spy::coordinates_csv(&j));
            }
            emit(a.out.as_ref(), &text, stdout)?;
            Ok(exit::OK)
        }
        Command::Polemap(a) => {
            let text = fs::read_to_string(&a.report).map_err(|e| CliError::io(&a.report, e))?;
            let report: RunReport = serde_json::from_str(&text)?;
            let rows = polemap::rows(&report, a.include_unconverged);
            emit(a.out.as_ref(), &polemap::to_csv(&rows), stdout)?;
            if let Some(p) = &a.lines {
                poles::write_file(p, &polemap::damping_lines(&a.zeta, polemap::covering_radius(&rows), 50))?;
            }
            Ok(exit::OK)
        }
    }
}
