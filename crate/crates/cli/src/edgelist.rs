//! Plain-text edge lists: one `src dst [weight]` triple per line, `#` starts
//! a comment. Loading accumulates `c[dst][src] += weight`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tvsched::RawConnectivity;

/// Node numbering used in a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBase {
    #[default]
    Zero,
    One,
}

impl IndexBase {
    pub fn offset(self) -> usize {
        match self {
            IndexBase::Zero => 0,
            IndexBase::One => 1,
        }
    }
}

/// How to read an edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeListOptions {
    pub directed: bool,
    pub base: IndexBase,
    /// Node count; when absent the largest id (or a `# nodes N` line) decides.
    pub nodes: Option<usize>,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        Self {
            directed: true,
            base: IndexBase::Zero,
            nodes: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("line {line}: node {node} outside 0..{n}")]
    NodeOutOfRange { line: usize, node: usize, n: usize },
    #[error("edge list has no nodes")]
    Empty,
}

struct Edge {
    line: usize,
    src: usize,
    dst: usize,
    weight: f64,
}

fn parse_id(token: &str, base: IndexBase, line: usize) -> Result<usize, EdgeListError> {
    let raw: usize = token.parse().map_err(|_| EdgeListError::Parse {
        line,
        message: format!("node id {token:?} is not a nonnegative integer"),
    })?;
    raw.checked_sub(base.offset())
        .ok_or_else(|| EdgeListError::Parse {
            line,
            message: format!("node id {raw} is invalid for one-based numbering"),
        })
}

fn nodes_directive(comment: &str) -> Option<usize> {
    let mut words = comment.split_whitespace();
    match (words.next(), words.next(), words.next()) {
        (Some("nodes"), Some(n), None) => n.parse().ok(),
        _ => None,
    }
}

/// Parses edge-list text.
pub fn parse_edge_list(
    text: &str,
    options: EdgeListOptions,
) -> Result<RawConnectivity<f64>, EdgeListError> {
    let mut edges = Vec::new();
    let mut declared = options.nodes;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.trim();
        if let Some(comment) = content.strip_prefix('#') {
            if options.nodes.is_none() {
                if let Some(n) = nodes_directive(comment) {
                    declared = Some(n);
                }
            }
            continue;
        }
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(EdgeListError::Parse {
                line,
                message: format!("expected `src dst [weight]`, found {} fields", tokens.len()),
            });
        }
        let src = parse_id(tokens[0], options.base, line)?;
        let dst = parse_id(tokens[1], options.base, line)?;
        let weight = match tokens.get(2) {
            Some(w) => w.parse::<f64>().map_err(|_| EdgeListError::Parse {
                line,
                message: format!("weight {w:?} is not a number"),
            })?,
            None => 1.0,
        };
        if !weight.is_finite() {
            return Err(EdgeListError::Parse {
                line,
                message: format!("weight {weight} is not finite"),
            });
        }
        if weight < 0.0 {
            return Err(EdgeListError::NegativeWeight { line, weight });
        }
        edges.push(Edge {
            line,
            src,
            dst,
            weight,
        });
    }
    let implied = edges
        .iter()
        .map(|e| e.src.max(e.dst) + 1)
        .max()
        .unwrap_or(0);
    let n = declared.unwrap_or(implied);
    if n == 0 {
        return Err(EdgeListError::Empty);
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for e in &edges {
        for node in [e.src, e.dst] {
            if node >= n {
                return Err(EdgeListError::NodeOutOfRange {
                    line: e.line,
                    node,
                    n,
                });
            }
        }
        c[(e.dst, e.src)] += e.weight;
        if !options.directed && e.src != e.dst {
            c[(e.src, e.dst)] += e.weight;
        }
    }
    Ok(RawConnectivity::new(c, options.directed).expect("weights validated as nonnegative"))
}

/// Reads an edge-list file.
pub fn load_edge_list(
    path: &Path,
    options: EdgeListOptions,
) -> Result<RawConnectivity<f64>, EdgeListError> {
    let text = std::fs::read_to_string(path).map_err(|source| EdgeListError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text, options)
}

/// Writes every nonzero entry as an edge, preceded by a `# nodes N` line.
/// Undirected inputs emit each pair once (`src <= dst`).
pub fn format_edge_list(c: &DMatrix<f64>, directed: bool, base: IndexBase) -> String {
    let n = c.nrows();
    let off = base.offset();
    let mut out = format!("# nodes {n}\n");
    for src in 0..n {
        for dst in 0..n {
            let w = c[(dst, src)];
            if w == 0.0 || (!directed && dst < src) {
                continue;
            }
            writeln!(out, "{} {} {}", src + off, dst + off, w).expect("writing to a string");
        }
    }
    out
}

pub fn save_edge_list(
    path: &Path,
    c: &DMatrix<f64>,
    directed: bool,
    base: IndexBase,
) -> std::io::Result<()> {
    std::fs::write(path, format_edge_list(c, directed, base))
}
