//! `nodes.tsv` / `edges.tsv` serialization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{EdgeOrigin, NodeId, NodeKind, TypedGraph};
use crate::error::{Error, Result};

pub const NODES_FILE: &str = "nodes.tsv";
pub const EDGES_FILE: &str = "edges.tsv";

/// Writes `nodes.tsv` (id, kind, label) and `edges.tsv` (u, v, origin) into `dir`.
pub fn write_graph(graph: &TypedGraph, dir: &Path) -> Result<()> {
    let nodes_path = dir.join(NODES_FILE);
    let mut out = create(&nodes_path)?;
    write_nodes(graph, &mut out).map_err(|e| Error::io(&nodes_path, e))?;
    out.flush().map_err(|e| Error::io(&nodes_path, e))?;

    let edges_path = dir.join(EDGES_FILE);
    let mut out = create(&edges_path)?;
    write_edges(graph, &mut out).map_err(|e| Error::io(&edges_path, e))?;
    out.flush().map_err(|e| Error::io(&edges_path, e))
}

pub fn read_graph(dir: &Path) -> Result<TypedGraph> {
    let nodes_path = dir.join(NODES_FILE);
    let edges_path = dir.join(EDGES_FILE);
    let mut graph = TypedGraph::new();
    read_nodes(&mut graph, open(&nodes_path)?, &nodes_path.display().to_string())?;
    read_edges(&mut graph, open(&edges_path)?, &edges_path.display().to_string())?;
    Ok(graph)
}

fn write_nodes(graph: &TypedGraph, out: &mut impl Write) -> std::io::Result<()> {
    for node in graph.nodes() {
        if node.label.contains(['\t', '\n', '\r']) {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("label of node {} contains a tab or newline", node.id),
            ));
        }
        writeln!(out, "{}\t{}\t{}", node.id, node.kind, node.label)?;
    }
    Ok(())
}

fn write_edges(graph: &TypedGraph, out: &mut impl Write) -> std::io::Result<()> {
    for e in graph.edges() {
        writeln!(out, "{}\t{}\t{}", e.u, e.v, e.origin.as_str())?;
    }
    Ok(())
}

pub(crate) fn read_nodes(graph: &mut TypedGraph, input: impl BufRead, name: &str) -> Result<()> {
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(name, lineno, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (Some(id), Some(kind), Some(label)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(name, lineno, "expected 3 tab-separated fields"));
        };
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad node id `{id}`")))?;
        let kind: NodeKind = kind
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad node kind `{kind}`")))?;
        if id != graph.node_count() {
            return Err(Error::parse(
                name,
                lineno,
                format!("node ids must be dense and ascending; expected {}, got {id}", graph.node_count()),
            ));
        }
        let before = graph.node_count();
        graph
            .add_node(kind, label)
            .map_err(|e| Error::parse(name, lineno, e.to_string()))?;
        if graph.node_count() == before {
            return Err(Error::parse(name, lineno, format!("duplicate node {kind}:{label}")));
        }
    }
    Ok(())
}

pub(crate) fn read_edges(graph: &mut TypedGraph, input: impl BufRead, name: &str) -> Result<()> {
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(name, lineno, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [u, v, origin] = fields[..] else {
            return Err(Error::parse(name, lineno, "expected 3 tab-separated fields"));
        };
        let parse_id = |s: &str| -> Result<NodeId> {
            s.parse::<u32>()
                .map(NodeId)
                .map_err(|_| Error::parse(name, lineno, format!("bad node id `{s}`")))
        };
        let origin: EdgeOrigin = origin
            .parse()
            .map_err(|e: Error| Error::parse(name, lineno, e.to_string()))?;
        graph
            .add_edge(parse_id(u)?, parse_id(v)?, origin)
            .map_err(|e| Error::parse(name, lineno, e.to_string()))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}
