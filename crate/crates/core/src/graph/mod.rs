//! Typed, undirected, unweighted graph storage.
//!
//! Nodes carry one of six entity kinds and a canonical label; the pair
//! `(kind, label)` identifies a node. Ids are dense and assigned in insertion
//! order so that embedding rows can be indexed directly by id. Adjacency lists
//! are kept sorted, which gives `O(log d)` edge membership tests for the
//! second-order walk bias.

mod tsv;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use tsv::{read_graph, write_graph, EDGES_FILE, NODES_FILE};

/// Dense node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(value: usize) -> Self {
        NodeId(u32::try_from(value).expect("node id exceeds u32 range"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Trial,
    Indication,
    Intervention,
    Phase,
    Sponsor,
    Endpoint,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::Trial,
        NodeKind::Indication,
        NodeKind::Intervention,
        NodeKind::Phase,
        NodeKind::Sponsor,
        NodeKind::Endpoint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Trial => "trial",
            NodeKind::Indication => "indication",
            NodeKind::Intervention => "intervention",
            NodeKind::Phase => "phase",
            NodeKind::Sponsor => "sponsor",
            NodeKind::Endpoint => "endpoint",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NodeKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParam(format!("unknown node kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
}

/// Where an edge came from: the source records, or user-supplied preference links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeOrigin {
    Native,
    Custom,
}

impl EdgeOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeOrigin::Native => "native",
            EdgeOrigin::Custom => "custom",
        }
    }
}

impl FromStr for EdgeOrigin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(EdgeOrigin::Native),
            "custom" => Ok(EdgeOrigin::Custom),
            other => Err(Error::InvalidParam(format!("unknown edge origin `{other}`"))),
        }
    }
}

/// Unordered node pair stored canonically with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub u: NodeId,
    pub v: NodeId,
}

impl Pair {
    /// Canonicalizes the order. Callers are expected to reject `a == b` themselves.
    #[inline]
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Pair { u: a, v: b }
        } else {
            Pair { u: b, v: a }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub origin: EdgeOrigin,
}

impl Edge {
    pub fn pair(&self) -> Pair {
        Pair { u: self.u, v: self.v }
    }
}

/// Read access to adjacency, shared by full graphs and subgraph views.
///
/// Ids always live in the parent graph's id space; `id_space` is the length of
/// any id-indexed array a consumer needs to allocate.
pub trait Topology: Sync {
    fn id_space(&self) -> usize;

    /// Vertices that belong to this topology, ascending.
    fn vertices(&self) -> Vec<NodeId>;

    /// Sorted neighbor list; empty for ids outside the topology.
    fn neighbors(&self, u: NodeId) -> &[NodeId];

    fn degree(&self, u: NodeId) -> usize {
        self.neighbors(u).len()
    }

    fn contains_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TypedGraph {
    nodes: Vec<Node>,
    index: HashMap<(NodeKind, String), NodeId>,
    adjacency: Vec<Vec<NodeId>>,
    edges: Vec<Edge>,
}

impl TypedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `(kind, label)`, inserting the node if it is new.
    pub fn add_node(&mut self, kind: NodeKind, label: &str) -> Result<NodeId> {
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        if let Some(&id) = self.index.get(&(kind, label.to_owned())) {
            return Ok(id);
        }
        let id = NodeId::from(self.nodes.len());
        self.nodes.push(Node {
            id,
            kind,
            label: label.to_owned(),
        });
        self.index.insert((kind, label.to_owned()), id);
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    /// Inserts an undirected edge. Returns `false` when the pair is already
    /// linked; the existing edge keeps its origin.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, origin: EdgeOrigin) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        let pair = Pair::new(a, b);
        let slot = match self.adjacency[pair.u.index()].binary_search(&pair.v) {
            Ok(_) => return Ok(false),
            Err(slot) => slot,
        };
        self.adjacency[pair.u.index()].insert(slot, pair.v);
        let back = &mut self.adjacency[pair.v.index()];
        let slot = back.binary_search(&pair.u).unwrap_err();
        back.insert(slot, pair.u);
        self.edges.push(Edge {
            u: pair.u,
            v: pair.v,
            origin,
        });
        Ok(true)
    }

    pub fn degree(&self, u: NodeId) -> Result<usize> {
        self.check(u)?;
        Ok(self.adjacency[u.index()].len())
    }

    pub fn node(&self, u: NodeId) -> Result<&Node> {
        self.nodes.get(u.index()).ok_or(Error::UnknownNode(u))
    }

    pub fn lookup(&self, kind: NodeKind, label: &str) -> Option<NodeId> {
        self.index.get(&(kind, label.to_owned())).copied()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.kind == kind)
            .map(|n| n.id)
            .collect()
    }

    pub fn kind(&self, u: NodeId) -> NodeKind {
        self.nodes[u.index()].kind
    }

    /// Copy of the graph keeping only edges of the given origin. Node ids are preserved.
    pub fn with_origin(&self, origin: EdgeOrigin) -> TypedGraph {
        let mut out = TypedGraph {
            nodes: self.nodes.clone(),
            index: self.index.clone(),
            adjacency: vec![Vec::new(); self.nodes.len()],
            edges: Vec::new(),
        };
        for e in self.edges.iter().filter(|e| e.origin == origin) {
            out.add_edge(e.u, e.v, e.origin).expect("edge valid in source graph");
        }
        out
    }

    /// Restricts the graph to `vertices` and `edges`, keeping parent ids.
    pub fn subgraph_view(&self, vertices: &[NodeId], edges: &[Pair]) -> Result<GraphView> {
        let mut members = HashSet::with_capacity(vertices.len());
        for &u in vertices {
            self.check(u)?;
            members.insert(u);
        }
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for &pair in edges {
            let pair = Pair::new(pair.u, pair.v);
            if !members.contains(&pair.u) || !members.contains(&pair.v) {
                return Err(Error::EdgeOutsideView { u: pair.u, v: pair.v });
            }
            if !self.contains_edge(pair.u, pair.v) {
                return Err(Error::EdgeNotInGraph { u: pair.u, v: pair.v });
            }
            if seen.insert(pair) {
                adjacency[pair.u.index()].push(pair.v);
                adjacency[pair.v.index()].push(pair.u);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mut vertices: Vec<NodeId> = members.into_iter().collect();
        vertices.sort_unstable();
        Ok(GraphView {
            vertices,
            adjacency,
            edge_count: seen.len(),
        })
    }

    fn check(&self, u: NodeId) -> Result<()> {
        if u.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(u))
        }
    }
}

impl Topology for TypedGraph {
    fn id_space(&self) -> usize {
        self.nodes.len()
    }

    fn vertices(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).map(NodeId::from).collect()
    }

    fn neighbors(&self, u: NodeId) -> &[NodeId] {
        self.adjacency.get(u.index()).map_or(&[], Vec::as_slice)
    }
}

/// Vertex/edge restriction of a [`TypedGraph`] sharing the parent's ids.
#[derive(Debug, Clone)]
pub struct GraphView {
    vertices: Vec<NodeId>,
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl GraphView {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains_vertex(&self, u: NodeId) -> bool {
        self.vertices.binary_search(&u).is_ok()
    }

    pub fn vertex_slice(&self) -> &[NodeId] {
        &self.vertices
    }
}

impl Topology for GraphView {
    fn id_space(&self) -> usize {
        self.adjacency.len()
    }

    fn vertices(&self) -> Vec<NodeId> {
        self.vertices.clone()
    }

    fn neighbors(&self, u: NodeId) -> &[NodeId] {
        self.adjacency.get(u.index()).map_or(&[], Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> (TypedGraph, Vec<NodeId>) {
        let mut g = TypedGraph::new();
        let ids = (0..n)
            .map(|i| g.add_node(NodeKind::Trial, &format!("NCT{i}")).unwrap())
            .collect();
        (g, ids)
    }

    #[test]
    fn add_node_is_idempotent() {
        let mut g = TypedGraph::new();
        let a = g.add_node(NodeKind::Phase, "phase 3").unwrap();
        let b = g.add_node(NodeKind::Phase, "phase 3").unwrap();
        assert_eq!(a, b);
        assert_eq!(g.node_count(), 1);
        // same label, different kind is a different node
        let c = g.add_node(NodeKind::Endpoint, "phase 3").unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn first_insert_gets_id_zero() {
        let mut g = TypedGraph::new();
        assert_eq!(g.add_node(NodeKind::Trial, "NCT04716933").unwrap(), NodeId(0));
    }

    #[test]
    fn empty_label_rejected() {
        let mut g = TypedGraph::new();
        assert!(matches!(g.add_node(NodeKind::Sponsor, ""), Err(Error::EmptyLabel)));
    }

    #[test]
    fn undirected_dedupe_and_self_loop() {
        let (mut g, n) = ids(2);
        assert!(g.add_edge(n[0], n[1], EdgeOrigin::Native).unwrap());
        assert!(!g.add_edge(n[1], n[0], EdgeOrigin::Custom).unwrap());
        assert_eq!(g.edges()[0].origin, EdgeOrigin::Native);
        assert!(matches!(g.add_edge(n[0], n[0], EdgeOrigin::Native), Err(Error::SelfLoop(_))));
        assert!(matches!(
            g.add_edge(n[0], NodeId(9), EdgeOrigin::Native),
            Err(Error::UnknownNode(NodeId(9)))
        ));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn degrees() {
        let (mut g, n) = ids(9);
        assert_eq!(g.degree(n[0]).unwrap(), 0);
        g.add_edge(n[0], n[1], EdgeOrigin::Native).unwrap();
        g.add_edge(n[1], n[2], EdgeOrigin::Native).unwrap();
        g.add_edge(n[2], n[0], EdgeOrigin::Native).unwrap();
        for &u in &n[..3] {
            assert_eq!(g.degree(u).unwrap(), 2);
        }
        for &leaf in &n[4..9] {
            g.add_edge(n[3], leaf, EdgeOrigin::Native).unwrap();
        }
        assert_eq!(g.degree(n[3]).unwrap(), 5);
        assert!(g.degree(NodeId(100)).is_err());
    }

    #[test]
    fn subgraph_views() {
        let (mut g, n) = ids(3);
        g.add_edge(n[0], n[1], EdgeOrigin::Native).unwrap();
        g.add_edge(n[1], n[2], EdgeOrigin::Native).unwrap();
        let view = g.subgraph_view(&n[..2], &[Pair::new(n[0], n[1])]).unwrap();
        assert_eq!(view.vertex_count(), 2);
        assert_eq!(view.edge_count(), 1);

        let empty = g.subgraph_view(&n, &[]).unwrap();
        assert!(n.iter().all(|&u| Topology::degree(&empty, u) == 0));

        assert!(matches!(
            g.subgraph_view(&n[..2], &[Pair::new(n[1], n[2])]),
            Err(Error::EdgeOutsideView { .. })
        ));
        assert!(matches!(
            g.subgraph_view(&n, &[Pair::new(n[0], n[2])]),
            Err(Error::EdgeNotInGraph { .. })
        ));
    }

    #[test]
    fn with_origin_filters() {
        let (mut g, n) = ids(3);
        g.add_edge(n[0], n[1], EdgeOrigin::Native).unwrap();
        g.add_edge(n[1], n[2], EdgeOrigin::Custom).unwrap();
        let raw = g.with_origin(EdgeOrigin::Native);
        assert_eq!(raw.node_count(), 3);
        assert_eq!(raw.edge_count(), 1);
        assert!(!raw.contains_edge(n[1], n[2]));
    }

    proptest! {
        #[test]
        fn adjacency_stays_symmetric(ops in prop::collection::vec((0u32..12, 0u32..12), 0..80)) {
            let (mut g, _) = ids(12);
            for &(a, b) in &ops {
                let _ = g.add_edge(NodeId(a), NodeId(b), EdgeOrigin::Native);
            }
            let edges_before = g.edge_count();
            // replaying the same sequence changes nothing
            for &(a, b) in &ops {
                let _ = g.add_edge(NodeId(a), NodeId(b), EdgeOrigin::Custom);
            }
            prop_assert_eq!(g.edge_count(), edges_before);

            let mut degree_sum = 0;
            for u in g.vertices() {
                let nbrs = g.neighbors(u);
                prop_assert!(nbrs.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(nbrs.len(), g.degree(u).unwrap());
                degree_sum += nbrs.len();
                for &v in nbrs {
                    prop_assert!(g.neighbors(v).contains(&u));
                }
            }
            prop_assert_eq!(degree_sum, 2 * g.edge_count());
        }

        #[test]
        fn view_degree_bounded_by_full(ops in prop::collection::vec((0u32..10, 0u32..10), 1..40), keep in prop::collection::vec(any::<bool>(), 10)) {
            let (mut g, n) = ids(10);
            for &(a, b) in &ops {
                let _ = g.add_edge(NodeId(a), NodeId(b), EdgeOrigin::Native);
            }
            let verts: Vec<NodeId> = n.iter().copied().filter(|u| keep[u.index()]).collect();
            let edges: Vec<Pair> = g.edges().iter().map(Edge::pair)
                .filter(|p| keep[p.u.index()] && keep[p.v.index()]).collect();
            let view = g.subgraph_view(&verts, &edges).unwrap();
            for &u in &n {
                prop_assert!(Topology::degree(&view, u) <= g.degree(u).unwrap());
            }
        }
    }
}
