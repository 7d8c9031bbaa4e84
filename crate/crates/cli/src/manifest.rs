//! System manifest: a small TOML file naming the Matrix Market inputs.
//!
//! ```toml
//! jacobian_path = "J.mtx"
//! b_path = "B.mtx"
//! c_path = "C.mtx"
//! ndyn = 60
//! d_re = 0.0
//! d_im = 0.0
//! ground_truth_path = "ground_truth.json"   # optional
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use dpse_core::oracle::ResidueEntry;
use dpse_core::sparse::{read_matrix_market, read_vector};
use dpse_core::{Complex64, DescriptorSystem, SparseMatrix};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub jacobian_path: PathBuf,
    pub b_path: PathBuf,
    pub c_path: PathBuf,
    pub ndyn: usize,
    #[serde(default)]
    pub d_re: f64,
    #[serde(default)]
    pub d_im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_path: Option<PathBuf>,
}

/// Spectrum and residues written by the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n_states: usize,
    pub n_algebraic: usize,
    pub seed: u64,
    /// Prescribed eigenvalues of the state matrix.
    pub spectrum: Vec<Complex64>,
    /// Oracle residues of the generated system, most dominant first.
    pub residues: Vec<ResidueEntry>,
}

/// A manifest with its paths made absolute, plus the loaded system.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub manifest: Manifest,
    pub system: DescriptorSystem,
}

impl Manifest {
    pub fn feedthrough(&self) -> Complex64 {
        Complex64::new(self.d_re, self.d_im)
    }

    pub fn read(path: &Path) -> Result<Manifest, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut m: Manifest = toml::from_str(&text).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut m.jacobian_path);
        resolve(&mut m.b_path);
        resolve(&mut m.c_path);
        if let Some(g) = m.ground_truth_path.as_mut() {
            resolve(g);
        }
        Ok(m)
    }

    pub fn jacobian(&self) -> Result<SparseMatrix, CliError> {
        read_matrix_market(&self.jacobian_path).map_err(|source| CliError::Mtx {
            path: self.jacobian_path.clone(),
            source,
        })
    }

    pub fn ground_truth(&self) -> Result<Option<GroundTruth>, CliError> {
        let Some(path) = &self.ground_truth_path else {
            return Ok(None);
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }
}

/// Reads the manifest and every file it references.
pub fn load(path: &Path) -> Result<LoadedSystem, CliError> {
    let manifest = Manifest::read(path)?;
    let j = manifest.jacobian()?;
    let vector = |p: &PathBuf| {
        read_vector(p).map_err(|source| CliError::Mtx {
            path: p.clone(),
            source,
        })
    };
    let b = vector(&manifest.b_path)?;
    let c = vector(&manifest.c_path)?;
    let invalid = |message: String| CliError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    if manifest.ndyn == 0 || manifest.ndyn > j.nrows() {
        return Err(invalid(format!(
            "ndyn = {} is inconsistent with a Jacobian of order {}",
            manifest.ndyn,
            j.nrows()
        )));
    }
    let system = DescriptorSystem::new(j, manifest.ndyn, b, c, manifest.feedthrough())
        .map_err(|e| invalid(e.to_string()))?;
    let report = system.validate();
    if !report.is_ok() {
        return Err(invalid(report.issues.join("; ")));
    }
    Ok(LoadedSystem { manifest, system })
}
