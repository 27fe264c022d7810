//! Plain-text graph formats.
//!
//! * Edge list: first data line is the node count `N`, then one `u v [w]`
//!   line per undirected edge (0-based, `w` defaults to 1).
//! * Matrix: `N` comma-separated rows of `N` reals.
//! * Attributes: one `u a1 a2 ... ad` line per node.
//!
//! Lines starting with `#` and blank lines are ignored everywhere.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Matrix,
}

impl GraphFormat {
    /// `.csv` and `.mat` files are matrices; everything else is an edge list.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") | Some("mat") => GraphFormat::Matrix,
            _ => GraphFormat::EdgeList,
        }
    }
}

fn data_lines<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, String)>> {
    source
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| match r {
            Ok((_, l)) => {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number '{}'", tok.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite number '{}'", tok.trim())));
    }
    Ok(v)
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid node index '{tok}'")))
}

pub fn load_graph<R: BufRead>(source: R, format: GraphFormat) -> Result<Graph> {
    match format {
        GraphFormat::EdgeList => load_edge_list(source),
        GraphFormat::Matrix => load_matrix(source),
    }
}

fn load_edge_list<R: BufRead>(source: R) -> Result<Graph> {
    let mut lines = data_lines(source);
    let (first, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse_err(1, "missing node count"))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| parse_err(first, format!("invalid node count '{}'", header.trim())))?;

    let mut weights = DMatrix::<f64>::zeros(n, n);
    let mut seen = vec![false; n * n];
    for entry in lines {
        let (line, text) = entry?;
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 2 && toks.len() != 3 {
            return Err(parse_err(line, "expected 'u v [w]'"));
        }
        let u = parse_index(toks[0], line)?;
        let v = parse_index(toks[1], line)?;
        let w = toks.get(2).map_or(Ok(1.0), |t| parse_f64(t, line))?;
        if u >= n || v >= n {
            return Err(parse_err(line, format!("node index out of range for N={n}")));
        }
        if u == v {
            return Err(parse_err(line, format!("self-loop at node {u}")));
        }
        if w < 0.0 {
            return Err(parse_err(line, format!("negative weight {w}")));
        }
        if std::mem::replace(&mut seen[u * n + v], true) {
            return Err(parse_err(line, format!("edge ({u}, {v}) listed twice")));
        }
        seen[v * n + u] = true;
        weights[(u, v)] = w;
        weights[(v, u)] = w;
    }
    Graph::from_weights(weights)
}

fn load_matrix<R: BufRead>(source: R) -> Result<Graph> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for entry in data_lines(source) {
        let (line, text) = entry?;
        let row = text
            .split(',')
            .map(|t| parse_f64(t, line))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    line,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if rows.first().is_some_and(|r| r.len() != n) {
        return Err(Error::Format(format!(
            "matrix has {n} rows of {} entries",
            rows[0].len()
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Graph::from_weights(DMatrix::from_row_slice(n, n, &flat))
}

/// Reads an attribute sidecar for a graph with `n` nodes.
pub fn load_attributes<R: BufRead>(source: R, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut attrs: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut dim = None;
    for entry in data_lines(source) {
        let (line, text) = entry?;
        let mut toks = text.split_whitespace();
        let u = parse_index(toks.next().unwrap_or_default(), line)?;
        if u >= n {
            return Err(parse_err(line, format!("node {u} out of range for N={n}")));
        }
        let values = toks.map(|t| parse_f64(t, line)).collect::<Result<Vec<_>>>()?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(parse_err(
                    line,
                    format!("attribute dimension {} differs from {d}", values.len()),
                ))
            }
            _ => {}
        }
        if attrs[u].replace(values).is_some() {
            return Err(parse_err(line, format!("node {u} listed twice")));
        }
    }
    attrs
        .into_iter()
        .enumerate()
        .map(|(u, a)| a.ok_or_else(|| Error::Attribute(format!("no attributes for node {u}"))))
        .collect()
}

/// Writes `g` as an edge list. Weights use Rust's shortest round-trip form.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    let mut s = format!("{}\n", g.n());
    for (u, v, w) in g.edges() {
        if w == 1.0 {
            writeln!(s, "{u} {v}").unwrap();
        } else {
            writeln!(s, "{u} {v} {w}").unwrap();
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}
