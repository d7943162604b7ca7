use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMat, SparseRowMat};

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

/// Reads a Matrix Market coordinate file (`real`, `integer` or `pattern`;
/// `general` or `symmetric`). Pattern entries become `1.0`, symmetric files are
/// mirrored and duplicate entries are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseRowMat> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

pub fn parse_matrix_market(text: &str) -> Result<SparseRowMat> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    let bad_header = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(bad_header("expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(bad_header(&format!("unsupported field '{other}'"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(bad_header(&format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let parts: Vec<&str> = line.split_whitespace().collect();
        let Some((rows, cols, nnz)) = size else {
            if parts.len() != 3 {
                return Err(err("size line must hold rows, cols and entry count".into()));
            }
            let nums: Vec<usize> = parts
                .iter()
                .map(|s| s.parse().map_err(|_| err(format!("invalid size value '{s}'"))))
                .collect::<Result<_>>()?;
            size = Some((nums[0], nums[1], nums[2]));
            triplets.reserve(if symmetric { 2 * nums[2] } else { nums[2] });
            continue;
        };
        let want = if field == Field::Pattern { 2 } else { 3 };
        if parts.len() < want {
            return Err(err(format!("expected {want} fields")));
        }
        let index = |s: &str, bound: usize| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err(format!("invalid index '{s}'")))?;
            if v == 0 || v > bound {
                return Err(err(format!("index {v} outside 1..={bound}")));
            }
            Ok(v - 1)
        };
        let i = index(parts[0], rows)?;
        let j = index(parts[1], cols)?;
        let v = match field {
            Field::Pattern => 1.0,
            _ => {
                let v: f64 = parts[2].parse().map_err(|_| err(format!("invalid value '{}'", parts[2])))?;
                if !v.is_finite() {
                    return Err(err(format!("non-finite value '{}'", parts[2])));
                }
                v
            }
        };
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
        if triplets.len() > 2 * nnz {
            return Err(err(format!("more entries than the declared {nnz}")));
        }
    }
    let (rows, cols, _) = size.ok_or(Error::Parse {
        line: 1,
        msg: "missing size line".into(),
    })?;
    SparseRowMat::from_triplets(rows, cols, &triplets)
}

/// Writes a `real general` coordinate file.
pub fn write_matrix_market(a: &SparseRowMat, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", a.rows(), a.cols(), a.nnz()));
    for i in 0..a.rows() {
        for (j, v) in a.row(i).iter() {
            out.push_str(&format!("{} {} {:.17e}\n", i + 1, j + 1, v));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a coordinate file into a dense matrix.
pub fn read_matrix_market_dense(path: impl AsRef<Path>) -> Result<DenseMat> {
    Ok(read_matrix_market(path)?.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_file() {
        let a = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n2 2 1\n").unwrap();
        assert_eq!(a, SparseRowMat::identity(2));
    }

    #[test]
    fn pattern_and_symmetric() {
        let a = parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 3 2\n1 3\n2 1\n").unwrap();
        assert!(a.values().iter().all(|&v| v == 1.0));
        assert_eq!(a.get(0, 2), 1.0);
        let s = parse_matrix_market("%%MatrixMarket matrix coordinate integer symmetric\n2 2 2\n1 1 3\n2 1 5\n").unwrap();
        assert_eq!(s.get(1, 0), 5.0);
        assert_eq!(s.get(0, 1), 5.0);
    }

    #[test]
    fn duplicates_summed_and_errors() {
        let a = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.5\n1 1 2.5\n").unwrap();
        assert_eq!(a.get(0, 0), 4.0);
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n1 1 1\n2 1 1\n").is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        let a = SparseRowMat::from_triplets(3, 2, &[(0, 1, 0.1), (2, 0, -3.25)]).unwrap();
        write_matrix_market(&a, &path).unwrap();
        assert_eq!(read_matrix_market(&path).unwrap(), a);
    }
}
