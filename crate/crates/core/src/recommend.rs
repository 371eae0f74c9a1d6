//! Unsupervised link prediction: rank trial-trial pairs by cosine similarity
//! and score the ranking against held-out links with precision@k.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeKind, Pair, Topology, TypedGraph};
use crate::trainer::EmbeddingTable;

pub const DEFAULT_KS: [usize; 4] = [10, 50, 100, 1000];

fn norm(table: &EmbeddingTable, u: NodeId) -> Result<f64> {
    let row = table.checked_row(u)?;
    let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        Err(Error::ZeroNorm(u))
    } else {
        Ok(n)
    }
}

#[inline]
fn cosine_with_norms(table: &EmbeddingTable, u: NodeId, v: NodeId, nu: f64, nv: f64) -> f64 {
    let dot: f64 = table.row(u).iter().zip(table.row(v)).map(|(a, b)| a * b).sum();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

pub fn cosine(table: &EmbeddingTable, u: NodeId, v: NodeId) -> Result<f64> {
    let nu = norm(table, u)?;
    let nv = norm(table, v)?;
    Ok(cosine_with_norms(table, u, v, nu, nv))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedLink {
    pub u: NodeId,
    pub v: NodeId,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

impl RankedLink {
    pub fn pair(&self) -> Pair {
        Pair { u: self.u, v: self.v }
    }
}

#[derive(Debug, Clone)]
pub enum PoolMode {
    /// Every trial pair not already linked in the graph.
    AllTrialPairs,
    /// Every pair within the given trial set.
    RestrictedToSet(Vec<NodeId>),
}

/// Candidate trial-trial pairs. Pairs are enumerated lazily; a pool over all
/// trials of a registry-scale graph has tens of millions of members.
#[derive(Debug, Clone)]
pub enum CandidatePool {
    Within { trials: Vec<NodeId>, skip: HashSet<Pair> },
    Explicit(Vec<Pair>),
}

pub fn candidate_pool(graph: &TypedGraph, mode: PoolMode) -> CandidatePool {
    match mode {
        PoolMode::AllTrialPairs => {
            let trials = graph.nodes_of_kind(NodeKind::Trial);
            let skip = graph
                .edges()
                .iter()
                .filter(|e| graph.kind(e.u) == NodeKind::Trial && graph.kind(e.v) == NodeKind::Trial)
                .map(|e| e.pair())
                .collect();
            CandidatePool::Within { trials, skip }
        }
        PoolMode::RestrictedToSet(mut trials) => {
            trials.sort_unstable();
            trials.dedup();
            CandidatePool::Within {
                trials,
                skip: HashSet::new(),
            }
        }
    }
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        match self {
            CandidatePool::Within { trials, skip } => {
                let n = trials.len();
                let members: HashSet<NodeId> = trials.iter().copied().collect();
                let skipped = skip
                    .iter()
                    .filter(|p| p.u != p.v && members.contains(&p.u) && members.contains(&p.v))
                    .count();
                n * n.saturating_sub(1) / 2 - skipped
            }
            CandidatePool::Explicit(pairs) => pairs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, pair: Pair) -> bool {
        match self {
            CandidatePool::Within { trials, skip } => {
                pair.u != pair.v
                    && trials.binary_search(&pair.u).is_ok()
                    && trials.binary_search(&pair.v).is_ok()
                    && !skip.contains(&pair)
            }
            CandidatePool::Explicit(pairs) => pairs.contains(&pair),
        }
    }

    pub fn pairs(&self) -> Box<dyn Iterator<Item = Pair> + '_> {
        match self {
            CandidatePool::Within { trials, skip } => Box::new(trials.iter().enumerate().flat_map(move |(i, &a)| {
                trials[i + 1..]
                    .iter()
                    .map(move |&b| Pair::new(a, b))
                    .filter(move |p| !skip.contains(p))
            })),
            CandidatePool::Explicit(pairs) => Box::new(pairs.iter().copied()),
        }
    }
}

/// Heap entry whose `Ord` puts better candidates first: higher score, then
/// the smaller canonical pair.
#[derive(Debug, Clone, Copy)]
struct Scored {
    score: f64,
    pair: Pair,
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

/// Bounded top-`n` selection: keeps the `n` best seen so far.
struct TopN {
    n: usize,
    heap: BinaryHeap<Reverse<Scored>>,
}

impl TopN {
    fn new(n: usize) -> Self {
        TopN {
            n,
            heap: BinaryHeap::with_capacity(n + 1),
        }
    }

    #[inline]
    fn offer(&mut self, s: Scored) {
        if self.heap.len() < self.n {
            self.heap.push(Reverse(s));
        } else if let Some(worst) = self.heap.peek() {
            if s > worst.0 {
                self.heap.pop();
                self.heap.push(Reverse(s));
            }
        }
    }

    fn merge(mut self, other: TopN) -> TopN {
        for Reverse(s) in other.heap {
            self.offer(s);
        }
        self
    }

    fn into_sorted(self) -> Vec<Scored> {
        let mut v: Vec<Scored> = self.heap.into_iter().map(|r| r.0).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// The `top_n` best candidates by cosine, skipping `exclude`. Ties order by
/// `(u, v)` ascending. Scoring is parallel over the current rayon pool; the
/// result equals a full sort followed by truncation.
pub fn rank_links(
    table: &EmbeddingTable,
    pool: &CandidatePool,
    exclude: &HashSet<Pair>,
    top_n: usize,
) -> Result<Vec<RankedLink>> {
    let mut norms = vec![0.0; table.rows()];
    let mut needed: Vec<NodeId> = match pool {
        CandidatePool::Within { trials, .. } => trials.clone(),
        CandidatePool::Explicit(pairs) => pairs.iter().flat_map(|p| [p.u, p.v]).collect(),
    };
    needed.sort_unstable();
    needed.dedup();
    for &u in &needed {
        norms[u.index()] = norm(table, u)?;
    }
    let score = |p: Pair| Scored {
        score: cosine_with_norms(table, p.u, p.v, norms[p.u.index()], norms[p.v.index()]),
        pair: p,
    };

    let best = match pool {
        CandidatePool::Within { trials, skip } => (0..trials.len())
            .into_par_iter()
            .fold(
                || TopN::new(top_n),
                |mut top, i| {
                    let a = trials[i];
                    for &b in &trials[i + 1..] {
                        let p = Pair::new(a, b);
                        if !skip.contains(&p) && !exclude.contains(&p) {
                            top.offer(score(p));
                        }
                    }
                    top
                },
            )
            .reduce(|| TopN::new(top_n), TopN::merge),
        CandidatePool::Explicit(pairs) => pairs
            .par_iter()
            .fold(
                || TopN::new(top_n),
                |mut top, &p| {
                    let p = Pair::new(p.u, p.v);
                    if p.u != p.v && !exclude.contains(&p) {
                        top.offer(score(p));
                    }
                    top
                },
            )
            .reduce(|| TopN::new(top_n), TopN::merge),
    };

    Ok(best
        .into_sorted()
        .into_iter()
        .enumerate()
        .map(|(i, s)| RankedLink {
            u: s.pair.u,
            v: s.pair.v,
            score: s.score,
            rank: i + 1,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionSeries {
    pub ks: Vec<usize>,
    pub precision: Vec<f64>,
}

impl PrecisionSeries {
    pub fn at(&self, k: usize) -> Option<f64> {
        self.ks.iter().position(|&x| x == k).map(|i| self.precision[i])
    }
}

pub fn precision_at_k(ranked: &[RankedLink], test: &HashSet<Pair>, ks: &[usize]) -> Result<PrecisionSeries> {
    if ranked.is_empty() {
        return Err(Error::InvalidParam("ranked list is empty".into()));
    }
    let mut precision = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 || k > ranked.len() {
            return Err(Error::InvalidParam(format!(
                "k = {k} must be between 1 and the ranked list length {}",
                ranked.len()
            )));
        }
        let hits = ranked[..k].iter().filter(|r| test.contains(&r.pair())).count();
        precision.push(hits as f64 / k as f64);
    }
    Ok(PrecisionSeries {
        ks: ks.to_vec(),
        precision,
    })
}

/// `rank  trial_u  trial_v  score  in_test` with a header row.
pub fn write_recommendations(
    graph: &TypedGraph,
    ranked: &[RankedLink],
    test: &HashSet<Pair>,
    out: &mut impl Write,
) -> Result<()> {
    let io = |e| Error::io("recommendations", e);
    writeln!(out, "rank\ttrial_u\ttrial_v\tscore\tin_test").map_err(io)?;
    for r in ranked {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}",
            r.rank,
            graph.node(r.u)?.label,
            graph.node(r.v)?.label,
            r.score,
            u8::from(test.contains(&r.pair()))
        )
        .map_err(io)?;
    }
    Ok(())
}

pub fn write_precision(series: &PrecisionSeries, out: &mut impl Write) -> Result<()> {
    let io = |e| Error::io("precision report", e);
    writeln!(out, "k\tprecision").map_err(io)?;
    for (k, p) in series.ks.iter().zip(&series.precision) {
        writeln!(out, "{k}\t{p:.4}").map_err(io)?;
    }
    Ok(())
}

/// Links referenced in `pairs` that are absent from a topology, e.g. test
/// links that must not already be edges of the training graph.
pub fn linked_pairs<G: Topology>(graph: &G, pairs: &[Pair]) -> Vec<Pair> {
    pairs.iter().copied().filter(|p| graph.contains_edge(p.u, p.v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeOrigin;
    use crate::sampling::rng_for;
    use proptest::prelude::*;
    use rand::Rng;

    fn table(rows: Vec<Vec<f64>>) -> EmbeddingTable {
        EmbeddingTable::from_rows(rows).unwrap()
    }

    fn trials(n: usize) -> TypedGraph {
        let mut g = TypedGraph::new();
        for i in 0..n {
            g.add_node(NodeKind::Trial, &format!("t{i}")).unwrap();
        }
        g
    }

    #[test]
    fn cosine_basics() {
        let t = table(vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![0.0, 0.0], vec![3.0, 0.0]]);
        assert_eq!(cosine(&t, NodeId(0), NodeId(0)).unwrap(), 1.0);
        assert_eq!(cosine(&t, NodeId(0), NodeId(1)).unwrap(), 0.0);
        assert_eq!(cosine(&t, NodeId(0), NodeId(3)).unwrap(), 1.0);
        assert!(matches!(cosine(&t, NodeId(0), NodeId(2)), Err(Error::ZeroNorm(NodeId(2)))));
    }

    #[test]
    fn ranks_by_score() {
        // cos(a,b) = 0.9-ish, cos(a,c) small
        let t = table(vec![vec![1.0, 0.0], vec![0.9, 0.43589], vec![0.1, 0.99499]]);
        let pool = CandidatePool::Explicit(vec![Pair::new(NodeId(0), NodeId(1)), Pair::new(NodeId(0), NodeId(2))]);
        let ranked = rank_links(&t, &pool, &HashSet::new(), 10).unwrap();
        assert_eq!(ranked[0].pair(), Pair::new(NodeId(0), NodeId(1)));
        assert_eq!(ranked[0].rank, 1);
        assert_eq!(ranked[1].rank, 2);
        assert!((ranked[0].score - 0.9).abs() < 1e-4);
    }

    #[test]
    fn all_excluded_is_empty() {
        let t = table(vec![vec![1.0], vec![1.0]]);
        let pair = Pair::new(NodeId(0), NodeId(1));
        let pool = CandidatePool::Explicit(vec![pair]);
        assert!(rank_links(&t, &pool, &HashSet::from([pair]), 5).unwrap().is_empty());
    }

    #[test]
    fn ties_break_by_canonical_order() {
        let t = table(vec![vec![1.0]; 4]);
        let g = trials(4);
        let pool = candidate_pool(&g, PoolMode::AllTrialPairs);
        let ranked = rank_links(&t, &pool, &HashSet::new(), 6).unwrap();
        let order: Vec<(u32, u32)> = ranked.iter().map(|r| (r.u.0, r.v.0)).collect();
        assert_eq!(order, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn pool_sizes() {
        let mut g = trials(4);
        assert_eq!(candidate_pool(&g, PoolMode::AllTrialPairs).len(), 6);
        g.add_edge(NodeId(0), NodeId(1), EdgeOrigin::Custom).unwrap();
        let pool = candidate_pool(&g, PoolMode::AllTrialPairs);
        assert_eq!(pool.len(), 5);
        assert_eq!(pool.pairs().count(), 5);
        assert!(!pool.contains(Pair::new(NodeId(0), NodeId(1))));
        let restricted = candidate_pool(&g, PoolMode::RestrictedToSet(vec![NodeId(2), NodeId(0), NodeId(1)]));
        assert_eq!(restricted.len(), 3);
        // non-trial nodes never enter the default pool
        let e = g.add_node(NodeKind::Endpoint, "os").unwrap();
        g.add_edge(NodeId(2), e, EdgeOrigin::Native).unwrap();
        assert_eq!(candidate_pool(&g, PoolMode::AllTrialPairs).len(), 5);
    }

    #[test]
    fn registry_scale_pool_arithmetic() {
        let g = trials(5725);
        let pool = candidate_pool(&g, PoolMode::AllTrialPairs);
        assert_eq!(pool.len(), 5725 * 5724 / 2);
        assert_eq!(pool.len(), 16_384_950);
    }

    fn ranked_list(pairs: &[(u32, u32)]) -> Vec<RankedLink> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| RankedLink {
                u: NodeId(u),
                v: NodeId(v),
                score: 1.0 - i as f64 * 0.01,
                rank: i + 1,
            })
            .collect()
    }

    #[test]
    fn precision_values() {
        let pairs: Vec<(u32, u32)> = (0..10).map(|i| (i, 100)).collect();
        let ranked = ranked_list(&pairs);
        let test = HashSet::from([Pair::new(NodeId(3), NodeId(100))]);
        let p = precision_at_k(&ranked, &test, &[10]).unwrap();
        assert!((p.at(10).unwrap() - 0.10).abs() < 1e-12);

        let none = precision_at_k(&ranked, &HashSet::new(), &[1, 10]).unwrap();
        assert_eq!(none.precision, [0.0, 0.0]);

        let all: HashSet<Pair> = ranked.iter().map(RankedLink::pair).collect();
        assert_eq!(precision_at_k(&ranked, &all, &[10]).unwrap().precision, [1.0]);

        assert!(precision_at_k(&ranked, &test, &[11]).is_err());
        assert!(precision_at_k(&[], &test, &[1]).is_err());
    }

    #[test]
    fn writers() {
        let g = trials(3);
        let ranked = ranked_list(&[(0, 1), (1, 2)]);
        let test = HashSet::from([Pair::new(NodeId(1), NodeId(2))]);
        let mut buf = Vec::new();
        write_recommendations(&g, &ranked, &test, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), "2\tt1\tt2\t0.990000\t1");
        let mut buf = Vec::new();
        write_precision(&precision_at_k(&ranked, &test, &[1, 2]).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k\tprecision\n1\t0.0000\n2\t0.5000\n");
    }

    proptest! {
        #[test]
        fn ranking_properties(seed in any::<u64>(), n in 4usize..25, scale in 0.01f64..50.0, top in 1usize..40) {
            let mut rng = rng_for(seed, &[]);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let g = trials(n);
            let pool = candidate_pool(&g, PoolMode::AllTrialPairs);
            let exclude: HashSet<Pair> = pool.pairs().filter(|_| rng.random_bool(0.2)).collect();
            let t = table(rows.clone());
            let ranked = rank_links(&t, &pool, &exclude, top).unwrap();

            // equals full sort + prefix
            let mut full: Vec<(f64, Pair)> = pool.pairs().filter(|p| !exclude.contains(p))
                .map(|p| (cosine(&t, p.u, p.v).unwrap(), p)).collect();
            full.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            full.truncate(top);
            let got: Vec<Pair> = ranked.iter().map(RankedLink::pair).collect();
            let want: Vec<Pair> = full.iter().map(|x| x.1).collect();
            prop_assert_eq!(&got, &want);
            prop_assert!(ranked.iter().all(|r| !exclude.contains(&r.pair())));
            prop_assert!(ranked.windows(2).all(|w| w[0].score >= w[1].score));

            // invariant to uniform positive scaling
            let scaled = table(rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect());
            let again: Vec<Pair> = rank_links(&scaled, &pool, &exclude, top).unwrap().iter().map(RankedLink::pair).collect();
            prop_assert_eq!(got, again);

            // precision bounds and monotone hit counts
            if !ranked.is_empty() {
                let test: HashSet<Pair> = pool.pairs().filter(|_| rng.random_bool(0.3)).collect();
                let ks: Vec<usize> = (1..=ranked.len()).collect();
                let series = precision_at_k(&ranked, &test, &ks).unwrap();
                let mut last = 0.0;
                for (k, p) in series.ks.iter().zip(&series.precision) {
                    prop_assert!((0.0..=1.0).contains(p));
                    let hits = *k as f64 * p;
                    prop_assert!((hits - hits.round()).abs() < 1e-9);
                    prop_assert!(hits >= last - 1e-9);
                    last = hits;
                }
            }
        }
    }
}
