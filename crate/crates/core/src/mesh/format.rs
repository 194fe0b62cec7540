//! Plain-text mesh format:
//!
//! ```text
//! foilmesh v1
//! nodes <n>
//! <r> <z>            (n lines)
//! triangles <m>
//! <i> <j> <k> <tag>  (m lines)
//! boundary <b>
//! <node index>       (b lines)
//! ```
//!
//! Floats are written in shortest round-trip form so `read(write(m)) == m`.

use std::fmt::Write as _;

use super::{Mesh, RegionTag};
use crate::{Error, Result};

const HEADER: &str = "foilmesh v1";

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "nodes {}", mesh.n_nodes()).unwrap();
    for [r, z] in mesh.nodes() {
        writeln!(s, "{r:?} {z:?}").unwrap();
    }
    writeln!(s, "triangles {}", mesh.n_triangles()).unwrap();
    for (t, tag) in mesh.triangles().iter().zip(mesh.tags()) {
        writeln!(s, "{} {} {} {}", t[0], t[1], t[2], tag).unwrap();
    }
    let b: Vec<usize> = (0..mesh.n_nodes())
        .filter(|&i| mesh.boundary()[i])
        .collect();
    writeln!(s, "boundary {}", b.len()).unwrap();
    for i in b {
        writeln!(s, "{i}").unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if !line.is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(parse_err(self.last + 1, 1, "unexpected end of input"))
    }

    fn section(&mut self, keyword: &str) -> Result<usize> {
        let (ln, line) = self.next()?;
        let mut it = line.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(parse_err(ln, 1, format!("expected `{keyword} <count>`")));
        }
        let count = it
            .next()
            .ok_or_else(|| parse_err(ln, keyword.len() + 2, "missing count"))?;
        let n = parse_field(ln, line, count)?;
        if it.next().is_some() {
            return Err(parse_err(ln, 1, "trailing tokens"));
        }
        Ok(n)
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn column_of(line: &str, token: &str) -> usize {
    token.as_ptr() as usize - line.as_ptr() as usize + 1
}

fn parse_field<T: std::str::FromStr>(ln: usize, line: &str, token: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    token
        .parse()
        .map_err(|e: T::Err| parse_err(ln, column_of(line, token), format!("`{token}`: {e}")))
}

fn fields(ln: usize, line: &str, n: usize) -> Result<Vec<&str>> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != n {
        return Err(parse_err(
            ln,
            1,
            format!("expected {n} fields, found {}", toks.len()),
        ));
    }
    Ok(toks)
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (ln, head) = lines.next()?;
    if head != HEADER {
        return Err(parse_err(ln, 1, format!("expected header `{HEADER}`")));
    }

    let n = lines.section("nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, line) = lines.next()?;
        let t = fields(ln, line, 2)?;
        nodes.push([parse_field(ln, line, t[0])?, parse_field(ln, line, t[1])?]);
    }

    let m = lines.section("triangles")?;
    let mut triangles = Vec::with_capacity(m);
    let mut tags = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, line) = lines.next()?;
        let t = fields(ln, line, 4)?;
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = parse_field(ln, line, t[k])?;
            if tri[k] >= n {
                return Err(parse_err(
                    ln,
                    column_of(line, t[k]),
                    format!("node index {} out of range (0..{n})", tri[k]),
                ));
            }
        }
        triangles.push(tri);
        tags.push(parse_field::<RegionTag>(ln, line, t[3])?);
    }

    let b = lines.section("boundary")?;
    let mut boundary = vec![false; n];
    for _ in 0..b {
        let (ln, line) = lines.next()?;
        let t = fields(ln, line, 1)?;
        let i: usize = parse_field(ln, line, t[0])?;
        if i >= n {
            return Err(parse_err(ln, 1, format!("boundary node {i} out of range")));
        }
        boundary[i] = true;
    }
    if let Ok((ln, _)) = lines.next() {
        return Err(parse_err(
            ln,
            1,
            "unexpected content after boundary section",
        ));
    }
    Mesh::new(nodes, triangles, tags, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_square() {
        let m = Mesh::rectangle(0.1, 0.2, 0.3, 0.7, 1, 1, RegionTag::Yoke).unwrap();
        let text = write_mesh(&m);
        assert!(text.starts_with("foilmesh v1\nnodes 4\n"));
        assert_eq!(read_mesh(&text).unwrap(), m);
    }

    #[test]
    fn bad_index_reports_line() {
        let text = "foilmesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7 Air\nboundary 0\n";
        match read_mesh(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(column, 5);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_tag_and_header() {
        let text = "foilmesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2 Copper\nboundary 0\n";
        assert!(matches!(read_mesh(text), Err(Error::Parse { line: 7, .. })));
        assert!(matches!(
            read_mesh("mesh\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_mesh("foilmesh v1\nnodes 2\n0 0\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn clockwise_triangle_is_validation_error() {
        let text = "foilmesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1 Air\nboundary 0\n";
        assert!(matches!(read_mesh(text), Err(Error::Validation(_))));
    }
}
