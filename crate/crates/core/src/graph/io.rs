//! Plain-text edge list format.
//!
//! ```text
//! # optional comment lines
//! n m
//! u v w      (m lines, 0-based vertices)
//! ```
//!
//! Weights are written with Rust's shortest round-trip float formatting, so
//! write followed by read reproduces every weight bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::WeightedGraph;
use crate::error::{Error, Result};

pub fn read_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_graph(&text, path)
}

pub fn write_graph(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_graph(g)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn render_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n(), g.m());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {:?}", e.u, e.v, e.weight);
    }
    out
}

/// Parses the edge list format. `origin` only labels error messages.
pub fn parse_graph(text: &str, origin: impl AsRef<Path>) -> Result<WeightedGraph> {
    let origin = origin.as_ref();
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing \"n m\" header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = fields[..] else {
        return Err(err(
            header_line,
            format!("expected \"n m\", found {header:?}"),
        ));
    };
    let n: usize = n
        .parse()
        .map_err(|_| err(header_line, format!("invalid vertex count {n:?}")))?;
    let m: usize = m
        .parse()
        .map_err(|_| err(header_line, format!("invalid edge count {m:?}")))?;
    if n == 0 {
        return Err(err(header_line, "vertex count must be positive".into()));
    }

    let mut edges = Vec::with_capacity(m);
    for (line, record) in lines {
        if edges.len() == m {
            return Err(err(
                line,
                format!("more than the declared {m} edge records"),
            ));
        }
        let fields: Vec<&str> = record.split_whitespace().collect();
        let [u, v, w] = fields[..] else {
            return Err(err(line, format!("expected \"u v w\", found {record:?}")));
        };
        let vertex = |s: &str| -> Result<usize> {
            let x: usize = s
                .parse()
                .map_err(|_| err(line, format!("invalid vertex {s:?}")))?;
            if x >= n {
                return Err(err(line, format!("vertex {x} out of range for n = {n}")));
            }
            Ok(x)
        };
        let (u, v) = (vertex(u)?, vertex(v)?);
        if u == v {
            return Err(err(line, format!("self-loop at vertex {u}")));
        }
        let w: f64 = w
            .parse()
            .map_err(|_| err(line, format!("invalid weight {w:?}")))?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(err(line, format!("weight {w} must be positive and finite")));
        }
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(err(
            header_line,
            format!("header declares {m} edges but {} were found", edges.len()),
        ));
    }
    WeightedGraph::new(n, edges)
}
