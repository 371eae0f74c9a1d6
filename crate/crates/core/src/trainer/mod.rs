//! SGNS training of the joint objective over a tagged walk corpus.
//!
//! Negatives are drawn from the degree distribution of the whole graph; Sub-tagged
//! pairs can instead be confined to the subgraph's own degree distribution with
//! [`SubNegatives::Subgraph`]. Both kinds of pair are interleaved in one
//! shuffled stream each epoch. With
//! one worker the run is bitwise reproducible for a fixed seed; with several
//! workers, updates to shared rows race without locking (Hogwild-style).
//!
//! By default contexts are scored against the embedding rows themselves.
//! [`ContextVectors::Separate`] keeps a second, zero-initialized context table
//! as word2vec does; the node embeddings are then the word rows.

mod embedding;
mod sampler;
mod sgns;

use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;

pub use embedding::EmbeddingTable;
pub use sampler::NegativeSampler;
pub use sgns::{extract_pairs, pair_gradients, pair_loss, PairGradients};
pub(crate) use sgns::pairs_in_walk;

use crate::error::{Error, Result};
use crate::graph::{GraphView, NodeId, TypedGraph};
use crate::sampling::{rng_for, DetRng};
use crate::walks::{WalkCorpus, WalkTag};
use sgns::{dot, sigmoid};

const INIT_STREAM: u64 = 0x1417;
const EPOCH_STREAM: u64 = 0xe90c;
const WORKER_STREAM: u64 = 0x3a7e;
const SAMPLE_STREAM: u64 = 0x5a3b;
const MAX_NEGATIVE_TRIES: usize = 64;

/// Which rows a context is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContextVectors {
    /// A separate context table, zero-initialized.
    Separate,
    /// The embedding table itself.
    #[default]
    Shared,
}

/// Where negatives for subgraph-walk pairs are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubNegatives {
    /// The subgraph's own degree distribution. In practice this repels
    /// subgraph members from each other: on a near-complete subgraph every
    /// member is as likely a negative as a context.
    Subgraph,
    /// The full graph's degree distribution, as for full-walk pairs.
    #[default]
    Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Skip-gram context radius within a walk.
    pub window: usize,
    pub negatives: usize,
    pub lr0: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Multiplier on the subgraph term of the objective.
    pub sub_loss_weight: f64,
    /// Rows are rescaled onto this norm if an update pushes them past it.
    pub max_row_norm: f64,
    /// Negative weights are `degree^degree_exponent`.
    pub degree_exponent: f64,
    /// 1 = deterministic; more = lock-free parallel updates.
    pub threads: usize,
    pub context: ContextVectors,
    pub sub_negatives: SubNegatives,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 20,
            window: 5,
            negatives: 5,
            lr0: 0.025,
            epochs: 1,
            seed: 0,
            sub_loss_weight: 1.0,
            max_row_norm: 100.0,
            degree_exponent: 1.0,
            threads: 1,
            context: ContextVectors::default(),
            sub_negatives: SubNegatives::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.dim < 1 {
            return bad("dimension must be >= 1".into());
        }
        if self.window < 1 {
            return bad("window must be >= 1".into());
        }
        if self.negatives < 1 {
            return bad("negatives must be >= 1".into());
        }
        if !(self.lr0.is_finite() && self.lr0 > 0.0) {
            return bad(format!("learning rate must be positive, got {}", self.lr0));
        }
        if self.epochs < 1 {
            return bad("epochs must be >= 1".into());
        }
        if !(self.sub_loss_weight.is_finite() && self.sub_loss_weight >= 0.0) {
            return bad(format!("sub_loss_weight must be >= 0, got {}", self.sub_loss_weight));
        }
        if self.max_row_norm.is_nan() || self.max_row_norm <= 0.0 {
            return bad(format!("max_row_norm must be positive, got {}", self.max_row_norm));
        }
        if self.threads < 1 {
            return bad("threads must be >= 1".into());
        }
        Ok(())
    }
}

/// Hooks into the training loop, used by tests to audit sampling.
pub trait TrainObserver: Sync {
    fn on_negative(&self, _tag: WalkTag, _node: NodeId) {}
}

pub struct NoObserver;

impl TrainObserver for NoObserver {}

/// Negative samplers for both loss terms.
#[derive(Debug, Clone)]
pub struct Samplers {
    pub full: NegativeSampler,
    pub sub: Option<NegativeSampler>,
}

impl Samplers {
    pub fn new(graph: &TypedGraph, sub: Option<&GraphView>, exponent: f64) -> Result<Self> {
        Ok(Samplers {
            full: NegativeSampler::from_degrees(graph, exponent)?,
            sub: sub.map(|s| NegativeSampler::from_degrees(s, exponent)).transpose()?,
        })
    }

    pub fn for_tag(&self, tag: WalkTag) -> &NegativeSampler {
        match tag {
            WalkTag::Full => &self.full,
            WalkTag::Sub => self.sub.as_ref().unwrap_or(&self.full),
        }
    }
}

/// Learned node embeddings plus the context table they were trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub embeddings: EmbeddingTable,
    /// `None` when contexts were scored against `embeddings`.
    pub contexts: Option<EmbeddingTable>,
}

impl TrainedModel {
    pub fn context_table(&self) -> &EmbeddingTable {
        self.contexts.as_ref().unwrap_or(&self.embeddings)
    }

    /// The model [`train`] starts from for `seed`.
    pub fn initial(rows: usize, dim: usize, seed: u64, mode: ContextVectors) -> Self {
        TrainedModel {
            embeddings: SharedTable::init(rows, dim, seed).into_table(),
            contexts: (mode == ContextVectors::Separate).then(|| EmbeddingTable::zeros(rows, dim)),
        }
    }
}

pub fn train(corpus: &WalkCorpus, graph: &TypedGraph, sub: Option<&GraphView>, config: &TrainConfig) -> Result<TrainedModel> {
    train_observed(corpus, graph, sub, config, &NoObserver)
}

pub fn train_observed<O: TrainObserver>(
    corpus: &WalkCorpus,
    graph: &TypedGraph,
    sub: Option<&GraphView>,
    config: &TrainConfig,
    observer: &O,
) -> Result<TrainedModel> {
    config.validate()?;
    check_corpus(corpus, graph, sub)?;
    let has_sub_walks = corpus.count(WalkTag::Sub) > 0 && config.sub_negatives == SubNegatives::Subgraph;
    let samplers = Samplers::new(graph, if has_sub_walks { sub } else { None }, config.degree_exponent)?;

    let words = SharedTable::init(graph.node_count(), config.dim, config.seed);
    let separate = (config.context == ContextVectors::Separate).then(|| SharedTable::zeros(graph.node_count(), config.dim));
    let per_epoch: u64 = (0..corpus.len())
        .map(|i| pairs_in_walk(corpus.walk(i).len(), config.window))
        .sum();
    let total = (per_epoch * config.epochs as u64).max(1);
    let progress = AtomicU64::new(0);

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        order.shuffle(&mut rng_for(config.seed, &[EPOCH_STREAM, epoch as u64]));
        let run = Run {
            corpus,
            samplers: &samplers,
            words: &words,
            contexts: separate.as_ref().unwrap_or(&words),
            config,
            progress: &progress,
            total,
            observer,
        };
        if config.threads == 1 {
            run.worker(&order, rng_for(config.seed, &[WORKER_STREAM, epoch as u64, 0]));
        } else {
            let chunk = order.len().div_ceil(config.threads).max(1);
            std::thread::scope(|scope| {
                for (w, part) in order.chunks(chunk).enumerate() {
                    let run = &run;
                    let rng = rng_for(config.seed, &[WORKER_STREAM, epoch as u64, w as u64]);
                    scope.spawn(move || run.worker(part, rng));
                }
            });
        }
    }

    let model = TrainedModel {
        embeddings: words.into_table(),
        contexts: separate.map(SharedTable::into_table),
    };
    model.embeddings.check_finite()?;
    if let Some(c) = &model.contexts {
        c.check_finite()?;
    }
    Ok(model)
}

fn check_corpus(corpus: &WalkCorpus, graph: &TypedGraph, sub: Option<&GraphView>) -> Result<()> {
    let n = graph.node_count();
    for (i, (tag, walk)) in corpus.iter().enumerate() {
        if let Some(u) = walk.iter().find(|u| u.index() >= n) {
            return Err(Error::Inconsistent(format!("walk {i} visits node {u} outside the graph")));
        }
        if tag == WalkTag::Sub {
            let Some(sub) = sub else {
                return Err(Error::Inconsistent("corpus has subgraph walks but no subgraph was given".into()));
            };
            if let Some(u) = walk.iter().find(|u| !sub.contains_vertex(**u)) {
                return Err(Error::Inconsistent(format!("subgraph walk {i} visits node {u} outside the subgraph")));
            }
        }
    }
    Ok(())
}

struct Run<'a, O> {
    corpus: &'a WalkCorpus,
    samplers: &'a Samplers,
    words: &'a SharedTable,
    contexts: &'a SharedTable,
    config: &'a TrainConfig,
    progress: &'a AtomicU64,
    total: u64,
    observer: &'a O,
}

impl<O: TrainObserver> Run<'_, O> {
    fn worker(&self, walks: &[usize], mut rng: DetRng) {
        let d = self.config.dim;
        let w = self.config.window;
        let mut center = vec![0.0; d];
        let mut target = vec![0.0; d];
        let mut grad = vec![0.0; d];
        let mut negatives = Vec::with_capacity(self.config.negatives);

        for &idx in walks {
            let walk = self.corpus.walk(idx);
            let tag = self.corpus.tag(idx);
            let done = self.progress.load(Ordering::Relaxed) as f64 / self.total as f64;
            let mut lr = self.config.lr0 * (1.0 - 0.99 * done.min(1.0));
            if tag == WalkTag::Sub {
                lr *= self.config.sub_loss_weight;
            }
            let sampler = self.samplers.for_tag(tag);

            for i in 0..walk.len() {
                let c = walk[i];
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(walk.len() - 1);
                for &x in &walk[lo..=hi] {
                    // a walk revisiting its own center is not a context
                    if x == c {
                        continue;
                    }
                    negatives.clear();
                    for _ in 0..self.config.negatives {
                        if let Some(n) = draw_negative(sampler, c, x, &mut rng) {
                            self.observer.on_negative(tag, n);
                            negatives.push(n);
                        }
                    }
                    if lr > 0.0 {
                        self.step(c, x, &negatives, lr, &mut center, &mut target, &mut grad);
                    }
                }
            }
            self.progress
                .fetch_add(pairs_in_walk(walk.len(), w), Ordering::Relaxed);
        }
    }

    /// One SGD step on the pair loss: context rows are updated in turn from
    /// the center's pre-step vector, then the center takes its accumulated step.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        c: NodeId,
        x: NodeId,
        negatives: &[NodeId],
        lr: f64,
        center: &mut [f64],
        target: &mut [f64],
        grad: &mut [f64],
    ) {
        let cap = self.config.max_row_norm;
        self.words.load(c, center);
        grad.fill(0.0);
        for (t, label) in std::iter::once((x, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0))) {
            self.contexts.load(t, target);
            let g = lr * (label - sigmoid(dot(center, target)));
            for k in 0..center.len() {
                grad[k] += g * target[k];
                target[k] += g * center[k];
            }
            clamp_norm(target, cap);
            self.contexts.store(t, target);
        }
        for k in 0..center.len() {
            center[k] += grad[k];
        }
        clamp_norm(center, cap);
        self.words.store(c, center);
    }
}

#[inline]
fn draw_negative(sampler: &NegativeSampler, center: NodeId, context: NodeId, rng: &mut DetRng) -> Option<NodeId> {
    for _ in 0..MAX_NEGATIVE_TRIES {
        let n = sampler.sample(rng);
        if n != center && n != context {
            return Some(n);
        }
    }
    None
}

#[inline]
fn clamp_norm(v: &mut [f64], cap: f64) {
    let norm = dot(v, v).sqrt();
    if norm > cap {
        let s = cap / norm;
        v.iter_mut().for_each(|x| *x *= s);
    }
}

/// Embedding rows as relaxed atomics so workers can share them without locks.
struct SharedTable {
    dim: usize,
    cells: Vec<AtomicU64>,
}

impl SharedTable {
    fn zeros(rows: usize, dim: usize) -> Self {
        SharedTable {
            dim,
            cells: (0..rows * dim).map(|_| AtomicU64::new(0.0f64.to_bits())).collect(),
        }
    }

    fn init(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, &[INIT_STREAM]);
        let half = 0.5 / dim as f64;
        let cells = (0..rows * dim)
            .map(|_| AtomicU64::new(rng.random_range(-half..half).to_bits()))
            .collect();
        SharedTable { dim, cells }
    }

    #[inline]
    fn load(&self, u: NodeId, out: &mut [f64]) {
        let base = u.index() * self.dim;
        for (o, cell) in out.iter_mut().zip(&self.cells[base..base + self.dim]) {
            *o = f64::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    #[inline]
    fn store(&self, u: NodeId, values: &[f64]) {
        let base = u.index() * self.dim;
        for (v, cell) in values.iter().zip(&self.cells[base..base + self.dim]) {
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    #[cfg(test)]
    fn snapshot(&self) -> EmbeddingTable {
        let data = self.cells.iter().map(|c| f64::from_bits(c.load(Ordering::Relaxed))).collect();
        EmbeddingTable::from_flat(self.dim, data)
    }

    fn into_table(self) -> EmbeddingTable {
        let data = self.cells.into_iter().map(|c| f64::from_bits(c.into_inner())).collect();
        EmbeddingTable::from_flat(self.dim, data)
    }
}

/// A positive pair with fixed negatives, for loss diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub center: NodeId,
    pub context: NodeId,
    pub negatives: Vec<NodeId>,
}

/// Draws `count` pairs uniformly from the corpus' skip-gram pairs, each with
/// `negatives` draws from its tag's sampler.
pub fn sample_pairs(
    corpus: &WalkCorpus,
    samplers: &Samplers,
    window: usize,
    negatives: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<PairSample>> {
    let mut rng = rng_for(seed, &[SAMPLE_STREAM]);
    let usable: Vec<usize> = (0..corpus.len()).filter(|&i| corpus.walk(i).len() > 1).collect();
    if usable.is_empty() {
        return Err(Error::Inconsistent("corpus has no walk with at least two nodes".into()));
    }
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 100 {
        attempts += 1;
        let idx = usable[rng.random_range(0..usable.len())];
        let walk = corpus.walk(idx);
        let i = rng.random_range(0..walk.len());
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(walk.len() - 1);
        let j = rng.random_range(lo..=hi);
        if walk[j] == walk[i] {
            continue;
        }
        let sampler = samplers.for_tag(corpus.tag(idx));
        let negs = (0..negatives)
            .filter_map(|_| draw_negative(sampler, walk[i], walk[j], &mut rng))
            .collect();
        out.push(PairSample {
            center: walk[i],
            context: walk[j],
            negatives: negs,
        });
    }
    Ok(out)
}

/// Mean pair loss over a fixed sample.
pub fn estimate_loss(model: &TrainedModel, sample: &[PairSample]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidParam("loss sample is empty".into()));
    }
    let mut total = 0.0;
    for s in sample {
        total += pair_loss(&model.embeddings, model.context_table(), s.center, s.context, &s.negatives)?;
    }
    Ok(total / sample.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeOrigin, NodeKind, Pair, Topology};
    use crate::walks::{generate_walks, WalkParams};
    use std::sync::Mutex;

    fn ring(n: usize) -> TypedGraph {
        let mut g = TypedGraph::new();
        for i in 0..n {
            g.add_node(NodeKind::Trial, &format!("t{i}")).unwrap();
        }
        for i in 0..n {
            g.add_edge(NodeId::from(i), NodeId::from((i + 1) % n), EdgeOrigin::Native).unwrap();
        }
        g
    }

    fn small_config(seed: u64) -> TrainConfig {
        TrainConfig {
            dim: 8,
            seed,
            ..TrainConfig::default()
        }
    }

    fn one_step(mode: ContextVectors) -> (TrainedModel, TrainedModel) {
        let g = ring(6);
        let mut corpus = WalkCorpus::new();
        corpus.push(WalkTag::Full, &[NodeId(0), NodeId(1)]);
        let samplers = Samplers::new(&g, None, 1.0).unwrap();
        let config = TrainConfig {
            dim: 3,
            context: mode,
            ..TrainConfig::default()
        };
        let words = SharedTable::init(6, 3, 4);
        // non-zero contexts so every gradient term is exercised
        let contexts = SharedTable::init(6, 3, 5);
        let start = TrainedModel {
            embeddings: words.snapshot(),
            contexts: (mode == ContextVectors::Separate).then(|| contexts.snapshot()),
        };
        let progress = AtomicU64::new(0);
        let run = Run {
            corpus: &corpus,
            samplers: &samplers,
            words: &words,
            contexts: if mode == ContextVectors::Separate { &contexts } else { &words },
            config: &config,
            progress: &progress,
            total: 1,
            observer: &NoObserver,
        };
        let (mut a, mut b, mut c) = (vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]);
        run.step(NodeId(0), NodeId(1), &[NodeId(3), NodeId(4)], 0.1, &mut a, &mut b, &mut c);
        let after = TrainedModel {
            embeddings: words.snapshot(),
            contexts: start.contexts.as_ref().map(|_| contexts.snapshot()),
        };
        (start, after)
    }

    #[test]
    fn single_step_equals_gradient_step() {
        // distinct rows: the update must equal theta - lr * dL/dtheta
        let negs = [NodeId(3), NodeId(4)];
        for mode in [ContextVectors::Separate, ContextVectors::Shared] {
            let (start, after) = one_step(mode);
            let grads = pair_gradients(&start.embeddings, start.context_table(), NodeId(0), NodeId(1), &negs).unwrap();
            for u in (0..6).map(NodeId) {
                let (gw, gc) = match mode {
                    ContextVectors::Separate => (grads.for_word(u), grads.for_context(u)),
                    ContextVectors::Shared => (grads.for_row(u), vec![0.0; 3]),
                };
                for k in 0..3 {
                    let want = start.embeddings.row(u)[k] - 0.1 * gw[k];
                    assert!((after.embeddings.row(u)[k] - want).abs() < 1e-15, "{mode:?}");
                    if mode == ContextVectors::Separate {
                        let want = start.context_table().row(u)[k] - 0.1 * gc[k];
                        assert!((after.context_table().row(u)[k] - want).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_single_thread() {
        let g = ring(12);
        let corpus = generate_walks(&g, &WalkParams { num_walks: 5, walk_length: 8, ..Default::default() }, WalkTag::Full).unwrap();
        let a = train(&corpus, &g, None, &small_config(9)).unwrap();
        let b = train(&corpus, &g, None, &small_config(9)).unwrap();
        let c = train(&corpus, &g, None, &small_config(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.embeddings.as_slice(), c.embeddings.as_slice());
        let shared = TrainConfig { context: ContextVectors::Shared, ..small_config(9) };
        let s1 = train(&corpus, &g, None, &shared).unwrap();
        assert!(s1.contexts.is_none());
        assert_eq!(s1, train(&corpus, &g, None, &shared).unwrap());
    }

    #[test]
    fn parallel_mode_stays_finite() {
        let g = ring(30);
        let corpus = generate_walks(&g, &WalkParams { num_walks: 10, walk_length: 10, ..Default::default() }, WalkTag::Full).unwrap();
        let config = TrainConfig { threads: 4, ..small_config(1) };
        let t = train(&corpus, &g, None, &config).unwrap().embeddings;
        assert!(t.as_slice().iter().all(|x| x.is_finite()));
        assert_eq!(t.rows(), 30);
    }

    #[test]
    fn row_norm_cap_holds() {
        let g = ring(10);
        let corpus = generate_walks(&g, &WalkParams { num_walks: 20, walk_length: 10, ..Default::default() }, WalkTag::Full).unwrap();
        let config = TrainConfig {
            lr0: 5.0,
            max_row_norm: 0.5,
            ..small_config(3)
        };
        let t = train(&corpus, &g, None, &config).unwrap();
        for table in [&t.embeddings, t.context_table()] {
            assert!(table.max_row_norm() <= 0.5 + 1e-12, "{}", table.max_row_norm());
        }
    }

    #[test]
    fn rejects_inconsistent_corpus() {
        let g = ring(6);
        let mut corpus = WalkCorpus::new();
        corpus.push(WalkTag::Sub, &[NodeId(0), NodeId(1)]);
        assert!(matches!(train(&corpus, &g, None, &small_config(0)), Err(Error::Inconsistent(_))));
        let sub = g.subgraph_view(&[NodeId(0), NodeId(5)], &[Pair::new(NodeId(0), NodeId(5))]).unwrap();
        assert!(matches!(train(&corpus, &g, Some(&sub), &small_config(0)), Err(Error::Inconsistent(_))));
        let mut outside = WalkCorpus::new();
        outside.push(WalkTag::Full, &[NodeId(0), NodeId(60)]);
        assert!(train(&outside, &g, None, &small_config(0)).is_err());
    }

    #[test]
    fn invalid_config() {
        for bad in [
            TrainConfig { dim: 0, ..Default::default() },
            TrainConfig { window: 0, ..Default::default() },
            TrainConfig { negatives: 0, ..Default::default() },
            TrainConfig { lr0: 0.0, ..Default::default() },
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { sub_loss_weight: -1.0, ..Default::default() },
            TrainConfig { threads: 0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidParam(_))), "{bad:?}");
        }
    }

    #[derive(Default)]
    struct Audit {
        sub_negatives: Mutex<Vec<NodeId>>,
    }

    impl TrainObserver for Audit {
        fn on_negative(&self, tag: WalkTag, node: NodeId) {
            if tag == WalkTag::Sub {
                self.sub_negatives.lock().unwrap().push(node);
            }
        }
    }

    fn audited_sub_negatives(mode: SubNegatives) -> (Vec<NodeId>, GraphView) {
        let mut g = ring(20);
        let members: Vec<NodeId> = (0..20).step_by(4).map(NodeId::from).collect();
        let mut edges = Vec::new();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                g.add_edge(a, b, EdgeOrigin::Custom).unwrap();
                edges.push(Pair::new(a, b));
            }
        }
        let sub = g.subgraph_view(&members, &edges).unwrap();
        let p = WalkParams { num_walks: 10, walk_length: 8, ..Default::default() };
        let mut corpus = generate_walks(&g, &p, WalkTag::Full).unwrap();
        corpus.append(generate_walks(&sub, &p, WalkTag::Sub).unwrap());
        let audit = Audit::default();
        let config = TrainConfig { sub_negatives: mode, ..small_config(2) };
        train_observed(&corpus, &g, Some(&sub), &config, &audit).unwrap();
        (audit.sub_negatives.into_inner().unwrap(), sub)
    }

    #[test]
    fn sub_negatives_stay_in_subgraph() {
        let (drawn, sub) = audited_sub_negatives(SubNegatives::Subgraph);
        assert!(!drawn.is_empty());
        assert!(drawn.iter().all(|u| sub.contains_vertex(*u) && Topology::degree(&sub, *u) > 0));
    }

    #[test]
    fn graph_negatives_reach_outside_subgraph() {
        let (drawn, sub) = audited_sub_negatives(SubNegatives::Graph);
        assert!(drawn.iter().any(|u| !sub.contains_vertex(*u)));
    }

    #[test]
    fn estimate_loss_behaviour() {
        let g = ring(8);
        let corpus = generate_walks(&g, &WalkParams { num_walks: 3, walk_length: 6, ..Default::default() }, WalkTag::Full).unwrap();
        let samplers = Samplers::new(&g, None, 1.0).unwrap();
        let sample = sample_pairs(&corpus, &samplers, 2, 3, 100, 5).unwrap();
        assert_eq!(sample.len(), 100);
        let t = TrainedModel::initial(8, 4, 1, ContextVectors::Separate);
        assert_eq!(estimate_loss(&t, &sample).unwrap(), estimate_loss(&t, &sample).unwrap());
        // zero contexts score every pair at ln 2 per term
        let want = sample.iter().map(|p| (1 + p.negatives.len()) as f64).sum::<f64>() * std::f64::consts::LN_2 / 100.0;
        assert!((estimate_loss(&t, &sample).unwrap() - want).abs() < 1e-12);
        assert!(estimate_loss(&t, &[]).is_err());
    }
}
