//! Plain-text edge lists.
//!
//! One directed edge `u v` per line, as whitespace-separated decimal vertex
//! ids. Lines starting with `#` are comments, except a `#n <count>` header
//! which fixes the vertex count (otherwise `n = 1 + max id`). Self-loops and
//! repeated edges are dropped and counted.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::Serialize;

use super::DirectedGraph;
use crate::error::{Error, Result};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeListWarnings {
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<(DirectedGraph, EdgeListWarnings)> {
    let mut declared_n: Option<(usize, usize)> = None;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut warnings = EdgeListWarnings::default();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut tokens = comment.split_whitespace();
            if tokens.next() == Some("n") {
                let value = tokens.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "'#n' header without a value".into(),
                })?;
                let n = value.parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno,
                    message: format!("bad vertex count {value:?}: {e}"),
                })?;
                declared_n = Some((n, lineno));
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(u), Some(v), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two vertex ids, got {trimmed:?}"),
            });
        };
        let parse = |tok: &str| {
            tok.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad vertex id {tok:?}: {e}"),
            })
        };
        edges.push((parse(u)?, parse(v)?, lineno));
    }

    let n = match declared_n {
        Some((n, _)) => {
            if let Some(&(u, v, line)) = edges.iter().find(|&&(u, v, _)| u >= n || v >= n) {
                return Err(Error::data(format!(
                    "line {line}: edge {u} {v} exceeds declared vertex count {n}"
                )));
            }
            n
        }
        None => edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0),
    };

    let mut adj = vec![Vec::new(); n];
    for (u, v, _) in edges {
        if u == v {
            warnings.self_loops_dropped += 1;
        } else {
            adj[u].push(v);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        warnings.duplicates_dropped += before - list.len();
    }
    if warnings.self_loops_dropped > 0 {
        warn!("dropped {} self-loop(s)", warnings.self_loops_dropped);
    }
    if warnings.duplicates_dropped > 0 {
        warn!("dropped {} duplicate edge(s)", warnings.duplicates_dropped);
    }
    Ok((DirectedGraph::from_sorted_unchecked(n, adj), warnings))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(DirectedGraph, EdgeListWarnings)> {
    let file = File::open(path.as_ref())?;
    read_edge_list(BufReader::new(file))
}

/// Writes the `#n` header followed by every edge in row-major order.
pub fn write_edge_list<W: Write>(graph: &DirectedGraph, mut out: W) -> Result<()> {
    writeln!(out, "#n {}", graph.n())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_edge_list(graph: &DirectedGraph, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_edge_list(graph, BufWriter::new(file))
}
