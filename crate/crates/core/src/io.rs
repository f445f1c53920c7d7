//! Matrix Market and plain-text vector files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{FracpowError, Result};
use crate::operator::SYMMETRY_TOLERANCE;

/// A square real matrix stored as full `(row, col, value)` triplets,
/// zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMarket {
    pub dim: usize,
    pub triplets: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, message: impl Into<String>) -> FracpowError {
    FracpowError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    token
        .ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

fn parse_f64(token: Option<&str>, line: usize) -> Result<f64> {
    let v: f64 = token
        .ok_or_else(|| parse_err(line, "missing value"))?
        .parse()
        .map_err(|_| parse_err(line, "invalid value"))?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(v)
}

/// Parses a real or integer, general or symmetric square matrix.
///
/// Symmetric storage is expanded to both triangles. General files are
/// checked for symmetry to the load tolerance.
pub fn parse_matrix_market(text: &str) -> Result<MatrixMarket> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    let layout = match fields[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unsupported layout '{other}'"))),
    };
    match fields[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, sizes) = data.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let mut tok = sizes.split_whitespace();
    let rows = parse_usize(tok.next(), size_line, "row count")?;
    let cols = parse_usize(tok.next(), size_line, "column count")?;
    if rows != cols {
        return Err(FracpowError::DimensionMismatch {
            expected: rows,
            found: cols,
        });
    }
    let dim = rows;

    let mut triplets = Vec::new();
    let mut push = |i: usize, j: usize, v: f64| {
        triplets.push((i, j, v));
        if symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j, i, v));
        }
    };

    match layout {
        Layout::Coordinate => {
            let nnz = parse_usize(tok.next(), size_line, "entry count")?;
            let mut seen = 0;
            for (line, text) in data {
                let mut tok = text.split_whitespace();
                let i = parse_usize(tok.next(), line, "row index")?;
                let j = parse_usize(tok.next(), line, "column index")?;
                let v = parse_f64(tok.next(), line)?;
                if i == 0 || j == 0 || i > dim || j > dim {
                    return Err(parse_err(line, format!("index ({i}, {j}) outside 1..={dim}")));
                }
                if symmetry == Symmetry::Symmetric && j > i {
                    return Err(parse_err(line, "symmetric storage must be lower triangular"));
                }
                push(i - 1, j - 1, v);
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(size_line, format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // column-major; symmetric stores the lower triangle only
            let mut cells = Vec::new();
            for j in 0..dim {
                let start = if symmetry == Symmetry::Symmetric { j } else { 0 };
                for i in start..dim {
                    cells.push((i, j));
                }
            }
            let mut values = Vec::with_capacity(cells.len());
            let mut last_line = size_line;
            for (line, text) in data {
                last_line = line;
                for t in text.split_whitespace() {
                    values.push(parse_f64(Some(t), line)?);
                }
            }
            if values.len() != cells.len() {
                return Err(parse_err(
                    last_line,
                    format!("expected {} values, found {}", cells.len(), values.len()),
                ));
            }
            for (&(i, j), v) in cells.iter().zip(values) {
                if v != 0.0 {
                    push(i, j, v);
                }
            }
        }
    }

    if symmetry == Symmetry::General {
        check_symmetry(dim, &triplets)?;
    }
    Ok(MatrixMarket { dim, triplets })
}

fn check_symmetry(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<()> {
    let mut entries = std::collections::HashMap::new();
    for &(i, j, v) in triplets {
        *entries.entry((i, j)).or_insert(0.0) += v;
    }
    let scale = entries
        .values()
        .fold(0.0f64, |m, v: &f64| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut keys: Vec<_> = entries.keys().copied().filter(|(i, j)| i > j).collect();
    let mut upper: Vec<_> = entries
        .keys()
        .copied()
        .filter(|(i, j)| i < j)
        .map(|(i, j)| (j, i))
        .collect();
    keys.append(&mut upper);
    keys.sort_unstable();
    keys.dedup();
    for (i, j) in keys {
        let lower = entries.get(&(i, j)).copied().unwrap_or(0.0);
        let upper = entries.get(&(j, i)).copied().unwrap_or(0.0);
        let defect = (lower - upper).abs() / scale;
        if defect > SYMMETRY_TOLERANCE {
            return Err(FracpowError::NotSymmetric { row: i, col: j, defect });
        }
    }
    debug_assert!(entries.keys().all(|&(i, j)| i < dim && j < dim));
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<MatrixMarket> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// Whitespace-separated reals; `#` starts a comment line.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        for tok in t.split_whitespace() {
            out.push(parse_f64(Some(tok), i + 1)?);
        }
    }
    Ok(out)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

/// One value per line in round-trip precision.
pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 24);
    for x in v {
        writeln!(s, "{x:e}").expect("writing to a String");
    }
    s
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    std::fs::write(path, format_vector(v))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_coordinate_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 1.5\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.dim, 3);
        assert_eq!(m.triplets.len(), 5);
        assert!(m.triplets.contains(&(0, 1, -1.0)) && m.triplets.contains(&(1, 0, -1.0)));
    }

    #[test]
    fn array_layouts() {
        let general = "%%MatrixMarket matrix array real general\n2 2\n2\n1\n1\n3\n";
        let m = parse_matrix_market(general).unwrap();
        assert_eq!(m.triplets, vec![(0, 0, 2.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, 3.0)]);
        let sym = "%%MatrixMarket matrix array integer symmetric\n2 2\n2 1\n3\n";
        let s = parse_matrix_market(sym).unwrap();
        assert_eq!(s.triplets.len(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        let asym = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n1 2 0.5\n2 2 1\n";
        assert!(matches!(
            parse_matrix_market(asym),
            Err(FracpowError::NotSymmetric { .. })
        ));
        let rect = "%%MatrixMarket matrix coordinate real general\n2 3 0\n";
        assert!(matches!(
            parse_matrix_market(rect),
            Err(FracpowError::DimensionMismatch { .. })
        ));
        let count = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n";
        assert!(matches!(parse_matrix_market(count), Err(FracpowError::Parse { .. })));
        let upper = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n";
        assert!(parse_matrix_market(upper).is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n").is_err());
    }

    #[test]
    fn vector_round_trip() {
        let v = vec![1.0, -0.1, 1e-300, std::f64::consts::PI];
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
        assert_eq!(parse_vector("# c\n1 2\n\n3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            parse_vector("1\nx\n"),
            Err(FracpowError::Parse { line: 2, .. })
        ));
    }
}
