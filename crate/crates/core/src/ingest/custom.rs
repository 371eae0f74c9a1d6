use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{EdgeOrigin, NodeId, NodeKind, Pair, TypedGraph};
use crate::sampling::rng_for;

/// A user-preference trial list, e.g. a vetted search result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CustomSet {
    trial_ids: Vec<String>,
}

impl CustomSet {
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut trial_ids = Vec::new();
        for id in ids {
            let id = id.as_ref().trim();
            if id.is_empty() {
                continue;
            }
            if !seen.insert(id.to_owned()) {
                return Err(Error::DuplicateTrial(id.to_owned()));
            }
            trial_ids.push(id.to_owned());
        }
        if trial_ids.len() < 2 {
            return Err(Error::Inconsistent(format!(
                "a custom set needs at least 2 trial ids, got {}",
                trial_ids.len()
            )));
        }
        Ok(CustomSet { trial_ids })
    }

    /// One trial id per line; blank lines and `#` comments are skipped.
    pub fn parse(input: impl BufRead, source_name: &str) -> Result<Self> {
        let mut ids = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                ids.push(line.to_owned());
            }
        }
        Self::new(ids)
    }

    pub fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        for id in &self.trial_ids {
            writeln!(out, "{id}")?;
        }
        Ok(())
    }

    pub fn trial_ids(&self) -> &[String] {
        &self.trial_ids
    }

    pub fn len(&self) -> usize {
        self.trial_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trial_ids.is_empty()
    }

    pub fn resolve(&self, graph: &TypedGraph) -> Result<Vec<NodeId>> {
        self.trial_ids
            .iter()
            .map(|id| graph.lookup(NodeKind::Trial, id).ok_or_else(|| Error::UnknownTrial(id.clone())))
            .collect()
    }
}

/// All `n(n-1)/2` trial-trial pairs over the resolved custom set, ascending.
pub fn build_custom_subgraph(graph: &TypedGraph, custom: &CustomSet) -> Result<Vec<Pair>> {
    let mut ids = custom.resolve(graph)?;
    ids.sort_unstable();
    let mut pairs = Vec::with_capacity(ids.len() * (ids.len() - 1) / 2);
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            pairs.push(Pair::new(a, b));
        }
    }
    Ok(pairs)
}

/// Train/test partition of a custom edge list. Both halves share `vertex_set`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphSplit {
    pub vertex_set: Vec<NodeId>,
    pub train_edges: Vec<Pair>,
    pub test_edges: Vec<Pair>,
    pub split_ratio: f64,
    pub seed: u64,
}

/// Number of train edges for `total` edges at `ratio`.
///
/// Floors `ratio * total`, so that the held-out share is rounded up; a small
/// epsilon absorbs binary representation error in products such as `0.8 * 9180`.
pub fn train_size(total: usize, ratio: f64) -> usize {
    ((ratio * total as f64) + 1e-9).floor() as usize
}

/// Uniform seeded partition of `edges` into train and test sets.
pub fn split_subgraph(edges: &[Pair], ratio: f64, seed: u64) -> Result<SubgraphSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParam(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let mut shuffled: Vec<Pair> = edges.iter().map(|p| Pair::new(p.u, p.v)).collect();
    shuffled.sort_unstable();
    shuffled.dedup();
    if shuffled.len() != edges.len() {
        return Err(Error::Inconsistent("custom edge list contains duplicate pairs".into()));
    }
    if let Some(p) = shuffled.iter().find(|p| p.u == p.v) {
        return Err(Error::SelfLoop(p.u));
    }
    let mut vertex_set: Vec<NodeId> = shuffled.iter().flat_map(|p| [p.u, p.v]).collect();
    vertex_set.sort_unstable();
    vertex_set.dedup();

    let mut rng = rng_for(seed, &[0x59117]);
    shuffled.shuffle(&mut rng);
    let n_train = train_size(shuffled.len(), ratio);
    let mut test_edges = shuffled.split_off(n_train);
    let mut train_edges = shuffled;
    train_edges.sort_unstable();
    test_edges.sort_unstable();
    Ok(SubgraphSplit {
        vertex_set,
        train_edges,
        test_edges,
        split_ratio: ratio,
        seed,
    })
}

/// Copy of `graph` with `train_edges` added as `Custom` trial-trial links.
pub fn enrich_graph(graph: &TypedGraph, train_edges: &[Pair]) -> Result<TypedGraph> {
    let mut enriched = graph.clone();
    for p in train_edges {
        for u in [p.u, p.v] {
            if enriched.node(u)?.kind != NodeKind::Trial {
                return Err(Error::NotTrialEdge { u: p.u, v: p.v });
            }
        }
        enriched.add_edge(p.u, p.v, EdgeOrigin::Custom)?;
    }
    Ok(enriched)
}

pub const SPLIT_FILE: &str = "split.tsv";

impl SubgraphSplit {
    /// Writes the split manifest: a `# seed=.. ratio=..` header, then
    /// `u_label<TAB>v_label<TAB>train|test` rows.
    pub fn write_tsv(&self, graph: &TypedGraph, out: &mut impl Write) -> Result<()> {
        let io = |e| Error::io("split manifest", e);
        writeln!(out, "# seed={} ratio={}", self.seed, self.split_ratio).map_err(io)?;
        writeln!(out, "# u_label\tv_label\tpartition").map_err(io)?;
        for (edges, part) in [(&self.train_edges, "train"), (&self.test_edges, "test")] {
            for p in edges {
                let u = &graph.node(p.u)?.label;
                let v = &graph.node(p.v)?.label;
                writeln!(out, "{u}\t{v}\t{part}").map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn read_tsv(graph: &TypedGraph, input: impl BufRead, source_name: &str) -> Result<Self> {
        let mut seed = None;
        let mut ratio = None;
        let mut train_edges = Vec::new();
        let mut test_edges = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for token in comment.split_whitespace() {
                    if let Some(v) = token.strip_prefix("seed=") {
                        seed = Some(v.parse::<u64>().map_err(|_| Error::parse(source_name, lineno, "bad seed"))?);
                    } else if let Some(v) = token.strip_prefix("ratio=") {
                        ratio = Some(v.parse::<f64>().map_err(|_| Error::parse(source_name, lineno, "bad ratio"))?);
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [u, v, part] = fields[..] else {
                return Err(Error::parse(source_name, lineno, "expected 3 tab-separated fields"));
            };
            let resolve = |label: &str| {
                graph
                    .lookup(NodeKind::Trial, label)
                    .ok_or_else(|| Error::parse(source_name, lineno, format!("unknown trial `{label}`")))
            };
            let (a, b) = (resolve(u)?, resolve(v)?);
            if a == b {
                return Err(Error::parse(source_name, lineno, "self pair"));
            }
            match part {
                "train" => train_edges.push(Pair::new(a, b)),
                "test" => test_edges.push(Pair::new(a, b)),
                other => {
                    return Err(Error::parse(source_name, lineno, format!("unknown partition `{other}`")));
                }
            }
        }
        let (Some(seed), Some(ratio)) = (seed, ratio) else {
            return Err(Error::parse(source_name, 1, "missing `# seed=.. ratio=..` header"));
        };
        train_edges.sort_unstable();
        test_edges.sort_unstable();
        let mut vertex_set: Vec<NodeId> = train_edges
            .iter()
            .chain(&test_edges)
            .flat_map(|p| [p.u, p.v])
            .collect();
        vertex_set.sort_unstable();
        vertex_set.dedup();
        Ok(SubgraphSplit {
            vertex_set,
            train_edges,
            test_edges,
            split_ratio: ratio,
            seed,
        })
    }
}
