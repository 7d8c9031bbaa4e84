use dpse_core::descriptor::ModelError;
use dpse_core::oracle::{modal_reconstruct, residues, ResidueTable};
use dpse_core::{Complex64, DescriptorSystem};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfSample {
    pub s: Complex64,
    pub h: Complex64,
    /// `k`-term modal approximant and its relative error against `h`.
    pub modal: Option<(Complex64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct TfTable {
    pub samples: Vec<TfSample>,
    /// Points skipped because they sit on a pole.
    pub skipped: Vec<Complex64>,
}

impl TfTable {
    pub fn max_relative_error(&self) -> Option<f64> {
        self.samples.iter().filter_map(|t| t.modal.map(|m| m.1)).reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let with_modal = self.samples.iter().any(|t| t.modal.is_some());
        let mut out = String::from("s_re,s_im,h_re,h_im");
        out.push_str(if with_modal { ",modal_re,modal_im,rel_err\n" } else { "\n" });
        for t in &self.samples {
            out.push_str(&format!("{},{},{},{}", t.s.re, t.s.im, t.h.re, t.h.im));
            if let Some((m, e)) = t.modal {
                out.push_str(&format!(",{},{},{}", m.re, m.im, e));
            }
            out.push('\n');
        }
        out
    }
}

/// `n` points `iω` with `ω` log-spaced over `[w_min, w_max]`.
pub fn frequency_sweep(w_min: f64, w_max: f64, n: usize) -> Result<Vec<Complex64>, CliError> {
    if !(w_min > 0.0 && w_max >= w_min) || n == 0 {
        return Err(CliError::usage(format!(
            "sweep needs 0 < w_min <= w_max and at least one point, got {w_min}:{w_max}:{n}"
        )));
    }
    if n == 1 {
        return Ok(vec![Complex64::new(0.0, w_min)]);
    }
    let (a, b) = (w_min.ln(), w_max.ln());
    Ok((0..n)
        .map(|k| Complex64::new(0.0, (a + (b - a) * k as f64 / (n - 1) as f64).exp()))
        .collect())
}

/// Parses `w_min:w_max:n`.
pub fn parse_sweep(text: &str) -> Result<Vec<Complex64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::usage(format!("sweep must look like w_min:w_max:n, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let w_min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let w_max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    frequency_sweep(w_min, w_max, n)
}

/// Evaluates `h` at each point; with `compare_modal = Some(k)` also the
/// `k`-term modal approximant from the dense oracle.
pub fn sample(sys: &DescriptorSystem, points: &[Complex64], compare_modal: Option<usize>) -> Result<TfTable, CliError> {
    let modal: Option<(ResidueTable, Complex64, usize)> = match compare_modal {
        Some(k) => {
            let ss = sys.reduce_to_state_space()?;
            Some((residues(&ss)?, ss.d, k))
        }
        None => None,
    };
    let mut table = TfTable::default();
    for &s in points {
        let h = match sys.eval_transfer(s) {
            Ok(t) => t.value,
            Err(ModelError::SingularShift { .. }) => {
                table.skipped.push(s);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let modal = modal.as_ref().map(|(t, d, k)| {
            let m = modal_reconstruct(t, *d, s, *k);
            (m, (m - h).norm() / h.norm().max(f64::MIN_POSITIVE))
        });
        if !h.is_finite() || modal.is_some_and(|(m, _)| !m.is_finite()) {
            table.skipped.push(s);
            continue;
        }
        table.samples.push(TfSample { s, h, modal });
    }
    Ok(table)
}
