//! Text formats for graphs, functions and vertex lists.
//!
//! Graph files hold one undirected edge per line, `x<TAB>y<TAB>mu`, each
//! edge listed once. Function files hold `vertex<TAB>value` lines and region
//! files one vertex id per line. `#` starts a comment anywhere on a line.
//!
//! Generated balls also carry a `#@truncated` line listing the outer-layer
//! vertices whose neighbourhoods were cut off; other readers see a comment.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::function::GraphFunction;
use crate::graph::{Edge, VertexId, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected} tab-separated fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("invalid vertex id {0:?}")]
    BadVertex(String),
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error("loop at vertex {0}")]
    Loop(VertexId),
    #[error("duplicate edge {x}-{y} (first listed on line {first_line})")]
    DuplicateEdge { x: VertexId, y: VertexId, first_line: usize },
    #[error("nonpositive weight {0}")]
    NonpositiveWeight(f64),
    #[error("vertex {0} listed twice")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("file contains no entries")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

const TRUNCATED_DIRECTIVE: &str = "#@truncated";

/// Non-empty lines with comments removed: `(line number, fields with 1-based columns)`.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<(usize, &str)>)> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            return None;
        }
        let mut fields = Vec::new();
        let mut offset = 0;
        for part in body.split('\t') {
            let lead = part.len() - part.trim_start().len();
            if !part.trim().is_empty() {
                fields.push((body[..offset + lead].chars().count() + 1, part.trim()));
            }
            offset += part.len() + 1;
        }
        Some((n + 1, fields))
    })
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> Error {
    Error::Parse(ParseError { line, column, kind })
}

fn vertex(line: usize, (column, s): (usize, &str)) -> Result<VertexId> {
    s.parse().map_err(|_| err(line, column, ParseErrorKind::BadVertex(s.to_string())))
}

fn number(line: usize, (column, s): (usize, &str)) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(err(line, column, ParseErrorKind::BadNumber(s.to_string()))),
    }
}

fn expect_fields(line: usize, fields: &[(usize, &str)], expected: usize) -> Result<()> {
    if fields.len() != expected {
        return Err(err(line, 1, ParseErrorKind::FieldCount { expected, found: fields.len() }));
    }
    Ok(())
}

/// Parses and validates a graph file.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut first_seen: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for (line, fields) in records(text) {
        expect_fields(line, &fields, 3)?;
        let x = vertex(line, fields[0])?;
        let y = vertex(line, fields[1])?;
        let mu = number(line, fields[2])?;
        if x == y {
            return Err(err(line, fields[1].0, ParseErrorKind::Loop(x)));
        }
        if !(mu > 0.0) {
            return Err(err(line, fields[2].0, ParseErrorKind::NonpositiveWeight(mu)));
        }
        let key = (x.min(y), x.max(y));
        if let Some(&first_line) = first_seen.get(&key) {
            return Err(err(line, 1, ParseErrorKind::DuplicateEdge { x: key.0, y: key.1, first_line }));
        }
        first_seen.insert(key, line);
        edges.push(Edge::new(x, y, mu));
    }
    if edges.is_empty() {
        return Err(err(1, 1, ParseErrorKind::Empty));
    }
    let g = WeightedGraph::from_edges(edges)?;
    let mut truncated = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        if let Some(rest) = raw.trim_start().strip_prefix(TRUNCATED_DIRECTIVE) {
            for s in rest.split_whitespace() {
                truncated.push(s.parse().map_err(|_| err(n + 1, 1, ParseErrorKind::BadVertex(s.to_string())))?);
            }
        }
    }
    g.with_truncated(truncated)
}

/// Serialises `g` so that [`parse_graph`] rebuilds the same edge set and
/// weights bit for bit.
pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        let _ = writeln!(out, "{}\t{}\t{:?}", e.x, e.y, e.weight);
    }
    let truncated: Vec<String> =
        g.vertices().iter().filter(|&&v| g.is_truncated(v).unwrap_or(false)).map(|v| v.to_string()).collect();
    if !truncated.is_empty() {
        let _ = writeln!(out, "{TRUNCATED_DIRECTIVE} {}", truncated.join(" "));
    }
    out
}

pub fn parse_function(text: &str) -> Result<GraphFunction> {
    let mut f = GraphFunction::new();
    for (line, fields) in records(text) {
        expect_fields(line, &fields, 2)?;
        let x = vertex(line, fields[0])?;
        if f.contains(x) {
            return Err(err(line, fields[0].0, ParseErrorKind::DuplicateVertex(x)));
        }
        f.set(x, number(line, fields[1])?);
    }
    Ok(f)
}

pub fn write_function(f: &GraphFunction) -> String {
    let mut out = String::new();
    for (x, v) in f.iter() {
        let _ = writeln!(out, "{x}\t{v:?}");
    }
    out
}

pub fn parse_vertex_list(text: &str) -> Result<Vec<VertexId>> {
    let mut out = Vec::new();
    for (line, fields) in records(text) {
        expect_fields(line, &fields, 1)?;
        let x = vertex(line, fields[0])?;
        if out.contains(&x) {
            return Err(err(line, fields[0].0, ParseErrorKind::DuplicateVertex(x)));
        }
        out.push(x);
    }
    if out.is_empty() {
        return Err(err(1, 1, ParseErrorKind::Empty));
    }
    Ok(out)
}

/// Parses a function file and checks every vertex exists in `g`.
pub fn parse_function_for(text: &str, g: &WeightedGraph) -> Result<GraphFunction> {
    let f = parse_function(text)?;
    for (line, fields) in records(text) {
        let x = vertex(line, fields[0])?;
        if !g.contains(x) {
            return Err(err(line, fields[0].0, ParseErrorKind::UnknownVertex(x)));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(e: Error) -> (usize, usize, ParseErrorKind) {
        match e {
            Error::Parse(p) => (p.line, p.column, p.kind),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_p3() {
        let g = parse_graph("0\t1\t1.0\n1\t2\t1.0").unwrap();
        assert_eq!(g.vertices(), &[0, 1, 2]);
        assert_eq!(g.degree(1).unwrap(), 2.0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_graph("# P3\n\n0\t1\t1.0  # first\n1\t2\t2.5\n").unwrap();
        assert_eq!(g.weight(2, 1), Some(2.5));
    }

    #[test]
    fn rejects_bad_edges_with_positions() {
        assert_eq!(kind(parse_graph("0\t0\t1.0").unwrap_err()), (1, 3, ParseErrorKind::Loop(0)));
        let (line, _, k) = kind(parse_graph("0\t1\t-2").unwrap_err());
        assert_eq!((line, k), (1, ParseErrorKind::NonpositiveWeight(-2.0)));
        let (line, _, k) = kind(parse_graph("0\t1\t1\n1\t2\t1\n1\t0\t3").unwrap_err());
        assert_eq!((line, k), (3, ParseErrorKind::DuplicateEdge { x: 0, y: 1, first_line: 1 }));
        let (line, col, k) = kind(parse_graph("0\t1\t1\n0\tx\t1").unwrap_err());
        assert_eq!((line, col, k), (2, 3, ParseErrorKind::BadVertex("x".into())));
        let (_, _, k) = kind(parse_graph("0\t1").unwrap_err());
        assert_eq!(k, ParseErrorKind::FieldCount { expected: 3, found: 2 });
        assert!(matches!(parse_graph("0\t1\t1\n2\t3\t1"), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn round_trip_is_exact() {
        let g = WeightedGraph::from_edges([Edge::new(0, 1, 0.1), Edge::new(1, 2, 1.0 / 3.0), Edge::new(2, 0, 7e-300)])
            .unwrap()
            .with_truncated([2])
            .unwrap();
        let h = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
        assert!(h.is_truncated(2).unwrap());
    }

    #[test]
    fn functions_and_vertex_lists() {
        let f = parse_function("0\t1.5\n2\t-3\n").unwrap();
        assert_eq!(f.get(2).unwrap(), -3.0);
        let back = parse_function(&write_function(&f)).unwrap();
        assert_eq!(f, back);
        assert!(matches!(kind(parse_function("0\t1\n0\t2").unwrap_err()).2, ParseErrorKind::DuplicateVertex(0)));
        assert_eq!(parse_vertex_list("1\n2\n# end\n").unwrap(), vec![1, 2]);
        let g = parse_graph("0\t1\t1").unwrap();
        let (line, _, k) = kind(parse_function_for("0\t1\n5\t2", &g).unwrap_err());
        assert_eq!((line, k), (2, ParseErrorKind::UnknownVertex(5)));
    }
}
