//! Edge-list, label and metadata files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use sbm_core::linalg::SymMatrix;

/// One `u v` line per undirected edge (`u <= v`), self-loops as `u u`.
pub fn write_edges(path: &Path, a: &SymMatrix) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for i in 0..a.n() {
        for (j, &x) in a.row(i).iter().enumerate().skip(i) {
            if x != 0.0 {
                writeln!(out, "{i} {j}")?;
            }
        }
    }
    out.flush().with_context(|| format!("writing {}", path.display()))
}

/// Reads an edge list into an `n x n` adjacency matrix. With `n` unset the
/// order is one past the largest index.
pub fn read_edges(path: &Path, n: Option<usize>) -> Result<SymMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize> {
            let s = s.with_context(|| format!("{}:{}: expected two vertex ids", path.display(), lineno + 1))?;
            s.parse()
                .with_context(|| format!("{}:{}: bad vertex id '{s}'", path.display(), lineno + 1))
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        if parts.next().is_some() {
            bail!("{}:{}: expected exactly two vertex ids", path.display(), lineno + 1);
        }
        edges.push((u, v, lineno + 1));
    }
    let max = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = match n {
        Some(n) => n,
        None if max > 0 => max,
        None => bail!("{}: no edges and no vertex count given", path.display()),
    };
    let mut m = sbm_core::linalg::Matrix::zeros(n, n);
    for (u, v, line) in edges {
        if u >= n || v >= n {
            bail!("{}:{line}: vertex id out of range 0..{n}", path.display());
        }
        m.set(u, v, 1.0);
        m.set(v, u, 1.0);
    }
    Ok(SymMatrix::from_matrix(m)?)
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .with_context(|| format!("{}:{}: bad label '{}'", path.display(), i + 1, l.trim()))
        })
        .collect()
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        let a = SymMatrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        write_edges(&path, &a).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "0 0\n0 1\n");
        assert_eq!(read_edges(&path, Some(3)).unwrap(), a);
        assert_eq!(read_edges(&path, None).unwrap().n(), 2);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        fs::write(&path, "0 1\n1 x\n").unwrap();
        let err = format!("{:#}", read_edges(&path, None).unwrap_err());
        assert!(err.contains(":2:"), "{err}");
        fs::write(&path, "0 1 2\n").unwrap();
        assert!(read_edges(&path, None).is_err());
        fs::write(&path, "0 5\n").unwrap();
        assert!(read_edges(&path, Some(3)).is_err());
    }
}
