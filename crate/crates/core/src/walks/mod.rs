//! Joint random-walk corpus: second-order biased walks over the enriched full
//! graph, plus walks confined to the custom train subgraph.
//!
//! Every walk draws from its own generator, seeded from
//! `(seed, tag, start node, walk index)`. Output order is canonical
//! (tag, start node, walk index), so the corpus does not depend on how many
//! rayon workers produced it.

mod transition;

use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

pub use transition::TransitionTables;

use crate::error::{Error, Result};
use crate::graph::{GraphView, NodeId, Topology, TypedGraph};
use crate::sampling::rng_for;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    /// Nodes per walk.
    pub walk_length: usize,
    /// Walks per start node.
    pub num_walks: usize,
    pub seed: u64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            p: 1.0,
            q: 1.0,
            walk_length: 16,
            num_walks: 100,
            seed: 0,
        }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        transition::check_bias(self.p, self.q)?;
        if self.walk_length < 2 {
            return Err(Error::InvalidParam(format!("walk length must be >= 2, got {}", self.walk_length)));
        }
        if self.num_walks < 1 {
            return Err(Error::InvalidParam("num_walks must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which graph a walk was sampled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WalkTag {
    Full,
    Sub,
}

impl WalkTag {
    fn code(self) -> u64 {
        match self {
            WalkTag::Full => 0,
            WalkTag::Sub => 1,
        }
    }

    fn letter(self) -> char {
        match self {
            WalkTag::Full => 'F',
            WalkTag::Sub => 'S',
        }
    }
}

impl fmt::Display for WalkTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkTag::Full => f.write_str("full"),
            WalkTag::Sub => f.write_str("sub"),
        }
    }
}

/// Walks stored back to back in one buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    nodes: Vec<NodeId>,
    offsets: Vec<usize>,
    tags: Vec<WalkTag>,
}

impl Default for WalkCorpus {
    fn default() -> Self {
        WalkCorpus {
            nodes: Vec::new(),
            offsets: vec![0],
            tags: Vec::new(),
        }
    }
}

impl WalkCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn push(&mut self, tag: WalkTag, walk: &[NodeId]) {
        self.nodes.extend_from_slice(walk);
        self.offsets.push(self.nodes.len());
        self.tags.push(tag);
    }

    pub fn append(&mut self, mut other: WalkCorpus) {
        let base = self.nodes.len();
        self.nodes.append(&mut other.nodes);
        self.offsets.extend(other.offsets[1..].iter().map(|o| o + base));
        self.tags.append(&mut other.tags);
    }

    #[inline]
    pub fn walk(&self, i: usize) -> &[NodeId] {
        &self.nodes[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn tag(&self, i: usize) -> WalkTag {
        self.tags[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (WalkTag, &[NodeId])> + '_ {
        (0..self.len()).map(|i| (self.tags[i], self.walk(i)))
    }

    pub fn count(&self, tag: WalkTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }

    pub fn token_count(&self) -> usize {
        self.nodes.len()
    }

    /// One walk per line: `F` or `S`, then space-separated node ids.
    pub fn write_dump(&self, out: &mut impl Write) -> std::io::Result<()> {
        for (tag, walk) in self.iter() {
            write!(out, "{}", tag.letter())?;
            for u in walk {
                write!(out, " {u}")?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_dump(input: impl BufRead, source_name: &str) -> Result<Self> {
        let mut corpus = WalkCorpus::new();
        let mut walk = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let tag = match fields.next() {
                Some("F") => WalkTag::Full,
                Some("S") => WalkTag::Sub,
                other => return Err(Error::parse(source_name, i + 1, format!("bad walk tag {other:?}"))),
            };
            walk.clear();
            for f in fields {
                let id = f
                    .parse::<u32>()
                    .map_err(|_| Error::parse(source_name, i + 1, format!("bad node id `{f}`")))?;
                walk.push(NodeId(id));
            }
            if walk.is_empty() {
                return Err(Error::parse(source_name, i + 1, "empty walk"));
            }
            corpus.push(tag, &walk);
        }
        Ok(corpus)
    }
}

/// `num_walks` walks from every vertex of `graph`, all tagged `tag`.
pub fn generate_walks<G: Topology>(graph: &G, params: &WalkParams, tag: WalkTag) -> Result<WalkCorpus> {
    params.validate()?;
    let tables = TransitionTables::build(graph, params.p, params.q)?;
    Ok(generate_walks_with(graph, &tables, params, tag))
}

/// Like [`generate_walks`] with prebuilt tables. Runs on the current rayon pool.
pub fn generate_walks_with<G: Topology>(
    graph: &G,
    tables: &TransitionTables,
    params: &WalkParams,
    tag: WalkTag,
) -> WalkCorpus {
    let starts = graph.vertices();
    let per_start: Vec<(Vec<NodeId>, Vec<usize>)> = starts
        .par_iter()
        .map(|&start| {
            let mut nodes = Vec::with_capacity(params.num_walks * params.walk_length);
            let mut lens = Vec::with_capacity(params.num_walks);
            for w in 0..params.num_walks {
                let mut rng = rng_for(params.seed, &[tag.code(), start.0 as u64, w as u64]);
                let begin = nodes.len();
                nodes.push(start);
                let mut previous = None;
                let mut current = start;
                while nodes.len() - begin < params.walk_length {
                    match tables.sample_next(graph, previous, current, &mut rng) {
                        Some(next) => {
                            nodes.push(next);
                            previous = Some(current);
                            current = next;
                        }
                        None => break,
                    }
                }
                lens.push(nodes.len() - begin);
            }
            (nodes, lens)
        })
        .collect();

    let total_nodes = per_start.iter().map(|(n, _)| n.len()).sum();
    let total_walks = per_start.iter().map(|(_, l)| l.len()).sum::<usize>();
    let mut corpus = WalkCorpus {
        nodes: Vec::with_capacity(total_nodes),
        offsets: Vec::with_capacity(total_walks + 1),
        tags: vec![tag; total_walks],
    };
    corpus.offsets.push(0);
    for (nodes, lens) in per_start {
        for len in lens {
            let last = *corpus.offsets.last().unwrap();
            corpus.offsets.push(last + len);
        }
        corpus.nodes.extend(nodes);
    }
    corpus
}

/// Full-tagged walks from every enriched-graph node followed by Sub-tagged
/// walks from every subgraph vertex. `sub_params.num_walks == 0` yields the
/// plain full-graph corpus.
pub fn generate_joint_corpus(
    enriched: &TypedGraph,
    train_sub: &GraphView,
    full_params: &WalkParams,
    sub_params: &WalkParams,
) -> Result<WalkCorpus> {
    if train_sub.id_space() != enriched.node_count() {
        return Err(Error::Inconsistent(format!(
            "subgraph id space ({}) does not match the enriched graph ({} nodes)",
            train_sub.id_space(),
            enriched.node_count()
        )));
    }
    let mut corpus = generate_walks(enriched, full_params, WalkTag::Full)?;
    if sub_params.num_walks > 0 && train_sub.vertex_count() > 0 {
        corpus.append(generate_walks(train_sub, sub_params, WalkTag::Sub)?);
    }
    Ok(corpus)
}

/// Runs `f` on a dedicated rayon pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParam(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
