//! Matrix Market reading and writing.
//!
//! Supports `coordinate` and `array` layouts with `real`, `integer`, `complex`
//! and `pattern` fields, and `general`, `symmetric`, `skew-symmetric` and
//! `hermitian` qualifiers. Symmetric storage is expanded on read.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use super::SparseMatrix;

#[derive(Debug, Error)]
pub enum MtxError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("entry count mismatch: header declares {declared}, file contains {found}")]
    EntryCount { declared: usize, found: usize },
    #[error("expected a vector, got a {nrows}x{ncols} matrix")]
    NotAVector { nrows: usize, ncols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix, MtxError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MtxError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix_market(&text)
}

/// Parses Matrix Market text already held in memory.
pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = banner.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, format!("bad banner: {banner}")));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unknown layout {other}"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" | "integer" => Field::Real,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unknown field {other}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unknown symmetry {other}"))),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(parse_err(1, "pattern field requires coordinate layout"));
    }

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = data.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(size_line, format!("bad size line: {e}")))?;
    let expected_dims = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(parse_err(size_line, "wrong number of size fields"));
    }
    let (nrows, ncols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && nrows != ncols {
        return Err(parse_err(size_line, "symmetric storage requires a square matrix"));
    }

    let value_fields = match field {
        Field::Real => 1,
        Field::Complex => 2,
        Field::Pattern => 0,
    };
    let parse_value = |line: usize, toks: &[&str]| -> Result<Complex64, MtxError> {
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| parse_err(line, format!("bad number {t:?}: {e}")))
        };
        Ok(match field {
            Field::Real => Complex64::new(num(toks[0])?, 0.0),
            Field::Complex => Complex64::new(num(toks[0])?, num(toks[1])?),
            Field::Pattern => Complex64::new(1.0, 0.0),
        })
    };

    let mut triplets = Vec::new();
    let mut push = |i: usize, j: usize, v: Complex64| {
        triplets.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, v)),
                Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
                Symmetry::Hermitian => triplets.push((j, i, v.conj())),
            }
        }
    };

    let found;
    let declared;
    match layout {
        Layout::Coordinate => {
            declared = dims[2];
            let mut count = 0;
            for (line, l) in data {
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != 2 + value_fields {
                    return Err(parse_err(line, format!("expected {} fields", 2 + value_fields)));
                }
                let idx = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|e| parse_err(line, format!("bad index {t:?}: {e}")))
                };
                let (i, j) = (idx(toks[0])?, idx(toks[1])?);
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_err(line, format!("index ({i}, {j}) out of range")));
                }
                let v = parse_value(line, &toks[2..])?;
                push(i - 1, j - 1, v);
                count += 1;
            }
            found = count;
        }
        Layout::Array => {
            // column-major; symmetric variants list the lower triangle only
            let positions: Vec<(usize, usize)> = match symmetry {
                Symmetry::General => (0..ncols)
                    .flat_map(|j| (0..nrows).map(move |i| (i, j)))
                    .collect(),
                Symmetry::SkewSymmetric => (0..ncols)
                    .flat_map(|j| (j + 1..nrows).map(move |i| (i, j)))
                    .collect(),
                _ => (0..ncols)
                    .flat_map(|j| (j..nrows).map(move |i| (i, j)))
                    .collect(),
            };
            declared = positions.len();
            let mut count = 0;
            for (line, l) in data {
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != value_fields {
                    return Err(parse_err(line, format!("expected {value_fields} fields")));
                }
                let v = parse_value(line, &toks)?;
                if let Some(&(i, j)) = positions.get(count) {
                    if v != Complex64::new(0.0, 0.0) {
                        push(i, j, v);
                    }
                }
                count += 1;
            }
            found = count;
        }
    }
    if found != declared {
        return Err(MtxError::EntryCount { declared, found });
    }
    SparseMatrix::from_triplets(nrows, ncols, &triplets)
        .map_err(|e| parse_err(0, e.to_string()))
}

/// Reads an `N×1` or `1×N` file (either layout) as a dense vector.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<Complex64>, MtxError> {
    let m = read_matrix_market(path)?;
    vector_from_matrix(&m)
}

fn vector_from_matrix(m: &SparseMatrix) -> Result<Vec<Complex64>, MtxError> {
    let (nrows, ncols) = (m.nrows(), m.ncols());
    if nrows != 1 && ncols != 1 {
        return Err(MtxError::NotAVector { nrows, ncols });
    }
    let mut v = vec![Complex64::new(0.0, 0.0); nrows.max(ncols)];
    for (i, j, x) in m.triplets() {
        v[i.max(j)] = x;
    }
    Ok(v)
}

fn is_real(values: impl IntoIterator<Item = Complex64>) -> bool {
    values.into_iter().all(|v| v.im == 0.0)
}

fn fmt_value(out: &mut String, v: Complex64, real: bool) {
    if real {
        let _ = write!(out, "{:e}", v.re);
    } else {
        let _ = write!(out, "{:e} {:e}", v.re, v.im);
    }
}

/// Formats a matrix as `coordinate general`, using the `real` field when
/// every stored value is real. Values print in shortest round-trip form.
pub fn format_matrix_market(m: &SparseMatrix) -> String {
    let real = is_real(m.values().iter().copied());
    let mut out = format!(
        "%%MatrixMarket matrix coordinate {} general\n{} {} {}\n",
        if real { "real" } else { "complex" },
        m.nrows(),
        m.ncols(),
        m.nnz()
    );
    for (i, j, v) in m.triplets() {
        let _ = write!(out, "{} {} ", i + 1, j + 1);
        fmt_value(&mut out, v, real);
        out.push('\n');
    }
    out
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &SparseMatrix) -> Result<(), MtxError> {
    let path = path.as_ref();
    fs::write(path, format_matrix_market(m)).map_err(|source| MtxError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a dense column vector in `array general` layout.
pub fn write_vector(path: impl AsRef<Path>, v: &[Complex64]) -> Result<(), MtxError> {
    let path = path.as_ref();
    let real = is_real(v.iter().copied());
    let mut out = format!(
        "%%MatrixMarket matrix array {} general\n{} 1\n",
        if real { "real" } else { "complex" },
        v.len()
    );
    for &x in v {
        fmt_value(&mut out, x, real);
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| MtxError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn coordinate_real() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 -1\n2 2 1\n",
        )
        .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), c(-1.0));
        assert_eq!(m.get(1, 1), c(1.0));
    }

    #[test]
    fn array_column() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n2 1\n1\n1\n")
            .unwrap();
        assert_eq!((m.nrows(), m.ncols(), m.nnz()), (2, 1, 2));
    }

    #[test]
    fn entry_count_mismatch() {
        let e = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n",
        )
        .unwrap_err();
        assert!(e.to_string().contains("entry count mismatch"));
    }

    #[test]
    fn symmetric_expanded() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 3\n",
        )
        .unwrap();
        assert_eq!(m.get(0, 1), c(3.0));
        assert_eq!(m.get(1, 0), c(3.0));
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn complex_hermitian() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate complex hermitian\n2 2 1\n2 1 1 2\n",
        )
        .unwrap();
        assert_eq!(m.get(1, 0), Complex64::new(1.0, 2.0));
        assert_eq!(m.get(0, 1), Complex64::new(1.0, -2.0));
    }

    #[test]
    fn parse_error_carries_line() {
        let e = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 x\n2 2 1\n",
        )
        .unwrap_err();
        match e {
            MtxError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_index() {
        let e = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n")
            .unwrap_err();
        assert!(matches!(e, MtxError::Parse { line: 3, .. }));
    }

    #[test]
    fn format_then_parse() {
        let m = SparseMatrix::from_triplets(
            3,
            2,
            &[(0, 0, Complex64::new(0.1, 0.0)), (2, 1, Complex64::new(-1.0 / 3.0, 2.5))],
        )
        .unwrap();
        assert_eq!(parse_matrix_market(&format_matrix_market(&m)).unwrap(), m);
    }

    #[test]
    fn sparse_coordinate_vector() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n4 1 2\n2 1 1\n4 1 -1\n",
        )
        .unwrap();
        let v = vector_from_matrix(&m).unwrap();
        assert_eq!(v, vec![c(0.0), c(1.0), c(0.0), c(-1.0)]);
    }
}
