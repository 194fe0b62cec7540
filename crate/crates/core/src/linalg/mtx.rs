//! Matrix Market (`.mtx`) coordinate I/O for debugging dumps.

use std::fmt::Write as _;

use super::{CsrMatrix, DenseMatrix};
use crate::{Error, Result};

/// Writes `a` as `coordinate real general`. Values use the shortest
/// round-trip representation, so reading back is exact.
pub fn write_sparse(a: &CsrMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {:?}", i + 1, j + 1, v);
    }
    s
}

pub fn write_dense(a: &DenseMatrix) -> String {
    write_sparse(&CsrMatrix::from_dense(a))
}

/// Reads `coordinate real general` or `coordinate real symmetric`.
pub fn read_sparse(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let h: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(parse_err(
            1,
            "expected `%%MatrixMarket matrix coordinate ...` header",
        ));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(parse_err(1, "only real matrices are supported"));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, &format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut trips = Vec::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if f.len() != 3 {
                    return Err(parse_err(ln + 1, "expected `rows cols nnz`"));
                }
                let p = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(ln + 1, "bad size"))
                };
                size = Some((p(f[0])?, p(f[1])?, p(f[2])?));
            }
            Some((nr, nc, _)) => {
                if f.len() != 3 {
                    return Err(parse_err(ln + 1, "expected `i j value`"));
                }
                let i: usize = f[0]
                    .parse()
                    .map_err(|_| parse_err(ln + 1, "bad row index"))?;
                let j: usize = f[1]
                    .parse()
                    .map_err(|_| parse_err(ln + 1, "bad column index"))?;
                let v: f64 = f[2].parse().map_err(|_| parse_err(ln + 1, "bad value"))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(parse_err(ln + 1, "index out of range"));
                }
                trips.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    trips.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nr, nc, _) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    let a = CsrMatrix::from_triplets(nr, nc, &trips);
    a.validate()?;
    Ok(a)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        column: 1,
        message: message.to_string(),
    }
}
