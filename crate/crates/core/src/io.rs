//! Plain-text graph and covariate files.
//!
//! Edge list: a header line `n <count>`, then one `i j` pair per line with
//! `i < j`, 0-indexed. Blank lines and lines starting with `#` are skipped.
//! Covariate file: one category label per line, labels `1..=q`.

use std::io::{BufRead, Write};

use crate::error::{FiberError, Result};
use crate::graph::{CovariateAssignment, Edge, Graph};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

/// Reads an ordered edge list, keeping file order. Order matters when the
/// file describes a construction path.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<(usize, Vec<Edge>)> {
    let mut lines = content_lines(reader);
    let (line_no, header) = lines.next().ok_or(FiberError::Parse {
        line: 1,
        message: "missing `n <count>` header".into(),
    })??;
    let mut parts = header.split_whitespace();
    let n = match (parts.next(), parts.next(), parts.next()) {
        (Some("n"), Some(count), None) => count.parse::<usize>().map_err(|e| FiberError::Parse {
            line: line_no,
            message: format!("bad vertex count: {e}"),
        })?,
        _ => {
            return Err(FiberError::Parse {
                line: line_no,
                message: format!("expected `n <count>`, found `{header}`"),
            })
        }
    };
    let mut edges = Vec::new();
    for item in lines {
        let (line_no, text) = item?;
        let nums: Vec<&str> = text.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|e| FiberError::Parse {
                line: line_no,
                message: format!("bad vertex `{s}`: {e}"),
            })
        };
        match nums.as_slice() {
            [a, b] => {
                let (i, j) = (parse(a)?, parse(b)?);
                if i >= j {
                    return Err(FiberError::Parse {
                        line: line_no,
                        message: format!("expected i < j, found {i} {j}"),
                    });
                }
                edges.push((i, j));
            }
            _ => {
                return Err(FiberError::Parse {
                    line: line_no,
                    message: format!("expected `i j`, found `{text}`"),
                })
            }
        }
    }
    Ok((n, edges))
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let (n, edges) = read_edge_list(reader)?;
    Graph::new(n, edges)
}

pub fn write_edge_list<W: Write>(mut out: W, n: usize, edges: &[Edge]) -> Result<()> {
    writeln!(out, "n {n}")?;
    for &(u, v) in edges {
        let (i, j) = if u < v { (u, v) } else { (v, u) };
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

/// Reads 1-based labels and returns a 0-based assignment.
pub fn read_covariates<R: BufRead>(reader: R) -> Result<CovariateAssignment> {
    let mut labels = Vec::new();
    for item in content_lines(reader) {
        let (line_no, text) = item?;
        let label: usize = text.parse().map_err(|e| FiberError::Parse {
            line: line_no,
            message: format!("bad category `{text}`: {e}"),
        })?;
        if label == 0 {
            return Err(FiberError::Parse {
                line: line_no,
                message: "category labels start at 1".into(),
            });
        }
        labels.push(label - 1);
    }
    Ok(CovariateAssignment::from_labels(labels))
}
