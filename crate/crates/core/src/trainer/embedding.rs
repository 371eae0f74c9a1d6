use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{Node, NodeId, TypedGraph};

/// Dense node-indexed embedding matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingTable {
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidParam("embedding rows must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParam("embedding rows have differing lengths".into()));
        }
        Ok(EmbeddingTable {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub(crate) fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len() % dim, 0);
        EmbeddingTable { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }

    #[inline]
    pub fn row(&self, u: NodeId) -> &[f64] {
        &self.data[u.index() * self.dim..(u.index() + 1) * self.dim]
    }

    pub fn row_mut(&mut self, u: NodeId) -> &mut [f64] {
        &mut self.data[u.index() * self.dim..(u.index() + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn checked_row(&self, u: NodeId) -> Result<&[f64]> {
        if u.index() >= self.rows() {
            return Err(Error::UnknownNode(u));
        }
        let row = self.row(u);
        if row.iter().all(|x| x.is_finite()) {
            Ok(row)
        } else {
            Err(Error::NonFinite(u))
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for u in 0..self.rows() {
            self.checked_row(NodeId::from(u))?;
        }
        Ok(())
    }

    pub fn max_row_norm(&self) -> f64 {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Word-vector text format: `<rows> <dim>`, then `<kind>:<label> v1 .. vd`
    /// per node in id order. Whitespace inside labels is written as `_`.
    pub fn write_text(&self, graph: &TypedGraph, out: &mut impl Write) -> Result<()> {
        if graph.node_count() != self.rows() {
            return Err(Error::Inconsistent(format!(
                "table has {} rows but the graph has {} nodes",
                self.rows(),
                graph.node_count()
            )));
        }
        let io = |e| Error::io("embedding output", e);
        writeln!(out, "{} {}", self.rows(), self.dim).map_err(io)?;
        for node in graph.nodes() {
            write!(out, "{}", token(node)).map_err(io)?;
            for x in self.row(node.id) {
                write!(out, " {x}").map_err(io)?;
            }
            out.write_all(b"\n").map_err(io)?;
        }
        Ok(())
    }

    /// Reads the text format, requiring rows to match `graph` node for node.
    pub fn read_text(graph: &TypedGraph, input: impl BufRead, source_name: &str) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::parse(source_name, 1, e.to_string()))?,
            None => return Err(Error::parse(source_name, 1, "empty embedding file")),
        };
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| Error::parse(source_name, 1, "bad header")))
            .collect::<Result<_>>()?;
        let [rows, dim] = dims[..] else {
            return Err(Error::parse(source_name, 1, "header must be `<rows> <dim>`"));
        };
        if dim == 0 {
            return Err(Error::parse(source_name, 1, "dimension must be positive"));
        }
        if rows != graph.node_count() {
            return Err(Error::Inconsistent(format!(
                "{source_name} has {rows} rows but the graph has {} nodes",
                graph.node_count()
            )));
        }
        let mut data = Vec::with_capacity(rows * dim);
        let mut seen = 0;
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let key = fields.next().unwrap_or_default();
            let Some(node) = graph.nodes().get(seen) else {
                return Err(Error::parse(source_name, lineno, "more rows than declared"));
            };
            if key != token(node) {
                return Err(Error::Inconsistent(format!(
                    "{source_name}:{lineno}: row `{key}` does not match graph node {} `{}`",
                    node.id,
                    token(node)
                )));
            }
            let before = data.len();
            for f in fields {
                let x: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(source_name, lineno, format!("bad value `{f}`")))?;
                data.push(x);
            }
            if data.len() - before != dim {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected {dim} values, got {}", data.len() - before),
                ));
            }
            seen += 1;
        }
        if seen != rows {
            return Err(Error::parse(source_name, seen + 1, format!("expected {rows} rows, got {seen}")));
        }
        Ok(EmbeddingTable { dim, data })
    }
}

fn token(node: &Node) -> String {
    let label: String = node
        .label
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    format!("{}:{}", node.kind, label)
}
