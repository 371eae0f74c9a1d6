//! Similarity diagnostics over pair populations: custom train/test links,
//! trials related only through shared attributes, and native trial-attribute
//! edges. Emits summary statistics, histograms and cross-model deltas.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::Write;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeOrigin, NodeId, NodeKind, Pair, Topology, TypedGraph};
use crate::ingest::SubgraphSplit;
use crate::recommend::cosine;
use crate::sampling::rng_for;
use crate::trainer::EmbeddingTable;

pub const DEFAULT_MIN_SHARED: usize = 2;
pub const DEFAULT_HIDDEN_SAMPLE: usize = 10_000;
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_DELTA_THRESHOLD: f64 = 0.05;

/// Above this many trial pairs, hidden pairs are found by rejection sampling
/// instead of exhaustive enumeration.
const ENUMERATION_LIMIT: usize = 5_000_000;
const HIDDEN_STREAM: u64 = 0x41dd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PopulationKind {
    CustomTrain,
    CustomTest,
    NativeHiddenTrialTrial,
    NativeDirect(NodeKind),
}

impl PopulationKind {
    pub fn is_native(self) -> bool {
        matches!(self, PopulationKind::NativeHiddenTrialTrial | PopulationKind::NativeDirect(_))
    }
}

impl fmt::Display for PopulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PopulationKind::CustomTrain => f.write_str("custom_train"),
            PopulationKind::CustomTest => f.write_str("custom_test"),
            PopulationKind::NativeHiddenTrialTrial => f.write_str("native_hidden_trial_trial"),
            PopulationKind::NativeDirect(kind) => write!(f, "native_direct_trial_{kind}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairPopulation {
    pub kind: PopulationKind,
    pub pairs: Vec<Pair>,
}

impl PairPopulation {
    pub fn name(&self) -> String {
        self.kind.to_string()
    }
}

pub fn custom_populations(split: &SubgraphSplit) -> [PairPopulation; 2] {
    [
        PairPopulation {
            kind: PopulationKind::CustomTrain,
            pairs: split.train_edges.clone(),
        },
        PairPopulation {
            kind: PopulationKind::CustomTest,
            pairs: split.test_edges.clone(),
        },
    ]
}

fn shared_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Trial pairs with at least `min_shared` common neighbors and no direct
/// edge, skipping pairs with both ends in `exclude_within` (the custom set,
/// whose pairs are covered by the custom populations). At most `sample_size`
/// pairs are returned, chosen uniformly with a seeded generator and sorted.
pub fn native_hidden_pairs(
    graph: &TypedGraph,
    min_shared: usize,
    sample_size: usize,
    seed: u64,
    exclude_within: &[NodeId],
) -> Result<PairPopulation> {
    if min_shared < 1 {
        return Err(Error::InvalidParam("min_shared must be >= 1".into()));
    }
    let trials = graph.nodes_of_kind(NodeKind::Trial);
    let excluded: HashSet<NodeId> = exclude_within.iter().copied().collect();
    let qualifies = |a: NodeId, b: NodeId| {
        !(excluded.contains(&a) && excluded.contains(&b))
            && !graph.contains_edge(a, b)
            && shared_count(graph.neighbors(a), graph.neighbors(b)) >= min_shared
    };
    let mut rng = rng_for(seed, &[HIDDEN_STREAM]);
    let n = trials.len();
    let total = n * n.saturating_sub(1) / 2;

    let mut pairs = if total <= ENUMERATION_LIMIT {
        let mut all = Vec::new();
        for (i, &a) in trials.iter().enumerate() {
            for &b in &trials[i + 1..] {
                if qualifies(a, b) {
                    all.push(Pair::new(a, b));
                }
            }
        }
        if all.len() > sample_size {
            let mut picked: Vec<Pair> = index::sample(&mut rng, all.len(), sample_size)
                .into_iter()
                .map(|i| all[i])
                .collect();
            picked.sort_unstable();
            picked
        } else {
            all
        }
    } else {
        let mut found = BTreeSet::new();
        let budget = sample_size.saturating_mul(2000);
        for _ in 0..budget {
            if found.len() >= sample_size {
                break;
            }
            let a = trials[rng.random_range(0..n)];
            let b = trials[rng.random_range(0..n)];
            if a != b && qualifies(a, b) {
                found.insert(Pair::new(a, b));
            }
        }
        found.into_iter().collect()
    };
    pairs.shrink_to_fit();
    Ok(PairPopulation {
        kind: PopulationKind::NativeHiddenTrialTrial,
        pairs,
    })
}

/// Every native edge joining a trial to a node of `kind`.
pub fn native_direct_pairs(graph: &TypedGraph, kind: NodeKind) -> Result<PairPopulation> {
    if kind == NodeKind::Trial {
        return Err(Error::InvalidParam("direct-link analysis needs a non-trial kind".into()));
    }
    let mut pairs: Vec<Pair> = graph
        .edges()
        .iter()
        .filter(|e| e.origin == EdgeOrigin::Native)
        .filter(|e| {
            let (a, b) = (graph.kind(e.u), graph.kind(e.v));
            (a == NodeKind::Trial && b == kind) || (b == NodeKind::Trial && a == kind)
        })
        .map(|e| e.pair())
        .collect();
    pairs.sort_unstable();
    Ok(PairPopulation {
        kind: PopulationKind::NativeDirect(kind),
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// `(lo, hi)` edges of bin `i` over [-1, 1].
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = 2.0 / self.bins() as f64;
        (-1.0 + i as f64 * w, -1.0 + (i + 1) as f64 * w)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityStats {
    pub n: usize,
    /// NaN for an empty population.
    pub mean: f64,
    /// Population standard deviation; NaN for an empty population.
    pub std: f64,
    pub histogram: Histogram,
}

pub fn population_stats(table: &EmbeddingTable, pop: &PairPopulation, bins: usize) -> Result<SimilarityStats> {
    if bins == 0 {
        return Err(Error::InvalidParam("histogram needs at least one bin".into()));
    }
    let mut counts = vec![0; bins];
    let mut values = Vec::with_capacity(pop.pairs.len());
    for p in &pop.pairs {
        let c = cosine(table, p.u, p.v)?;
        let bin = (((c + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
        values.push(c);
    }
    let n = values.len();
    let (mean, std) = if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n as f64;
        (mean, var.sqrt())
    };
    Ok(SimilarityStats {
        n,
        mean,
        std,
        histogram: Histogram { counts },
    })
}

/// Stats for one embedding table over a fixed list of populations.
#[derive(Debug, Clone)]
pub struct ModelStats {
    pub model: String,
    pub populations: Vec<(PopulationKind, SimilarityStats)>,
}

pub fn model_stats(model: &str, table: &EmbeddingTable, pops: &[PairPopulation], bins: usize) -> Result<ModelStats> {
    Ok(ModelStats {
        model: model.to_string(),
        populations: pops
            .iter()
            .map(|p| Ok((p.kind, population_stats(table, p, bins)?)))
            .collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub model: String,
    pub population: PopulationKind,
    pub mean: f64,
    pub std: f64,
    pub delta_mean: f64,
    pub delta_std: f64,
    pub flagged: bool,
}

/// Deltas of every model against `baseline`, flagging native populations
/// whose mean moved by more than `threshold`.
pub fn compare_models(models: &[ModelStats], baseline: &str, threshold: f64) -> Result<Vec<ComparisonRow>> {
    if models.len() < 2 {
        return Err(Error::InvalidParam("comparison needs at least two models".into()));
    }
    let base = models
        .iter()
        .find(|m| m.model == baseline)
        .ok_or_else(|| Error::InvalidParam(format!("baseline model `{baseline}` not among the inputs")))?;
    let kinds: Vec<PopulationKind> = base.populations.iter().map(|(k, _)| *k).collect();
    let mut rows = Vec::new();
    for m in models {
        let these: Vec<PopulationKind> = m.populations.iter().map(|(k, _)| *k).collect();
        if these != kinds {
            return Err(Error::Inconsistent(format!(
                "model `{}` was evaluated on different populations than `{baseline}`",
                m.model
            )));
        }
        for ((kind, s), (_, b)) in m.populations.iter().zip(&base.populations) {
            if s.n != b.n {
                return Err(Error::Inconsistent(format!(
                    "population {kind} has {} pairs for `{}` but {} for `{baseline}`",
                    s.n, m.model, b.n
                )));
            }
            let delta_mean = s.mean - b.mean;
            rows.push(ComparisonRow {
                model: m.model.clone(),
                population: *kind,
                mean: s.mean,
                std: s.std,
                delta_mean,
                delta_std: s.std - b.std,
                flagged: kind.is_native() && delta_mean.abs() > threshold,
            });
        }
    }
    Ok(rows)
}

pub fn write_stats(models: &[ModelStats], out: &mut impl Write) -> Result<()> {
    let io = |e| Error::io("stats.tsv", e);
    writeln!(out, "model\tpopulation\tmean\tstd\tn").map_err(io)?;
    for m in models {
        for (kind, s) in &m.populations {
            writeln!(out, "{}\t{kind}\t{:.6}\t{:.6}\t{}", m.model, s.mean, s.std, s.n).map_err(io)?;
        }
    }
    Ok(())
}

pub fn histogram_file_name(model: &str, kind: PopulationKind) -> String {
    format!("hist_{model}_{kind}.tsv")
}

pub fn write_histogram(hist: &Histogram, out: &mut impl Write) -> Result<()> {
    let io = |e| Error::io("histogram", e);
    writeln!(out, "bin_lo\tbin_hi\tcount").map_err(io)?;
    for (i, c) in hist.counts.iter().enumerate() {
        let (lo, hi) = hist.edges(i);
        writeln!(out, "{lo:.4}\t{hi:.4}\t{c}").map_err(io)?;
    }
    Ok(())
}

pub fn write_comparison(rows: &[ComparisonRow], out: &mut impl Write) -> Result<()> {
    let io = |e| Error::io("compare.tsv", e);
    writeln!(out, "model\tpopulation\tmean\tstd\tdelta_mean\tdelta_std\tflagged").map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            r.model,
            r.population,
            r.mean,
            r.std,
            r.delta_mean,
            r.delta_std,
            u8::from(r.flagged)
        )
        .map_err(io)?;
    }
    Ok(())
}
