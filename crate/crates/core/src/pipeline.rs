//! End-to-end wiring of the five compared models: node2vec on the raw graph,
//! node2vec on the enriched graph, and custom2vec with a given number of
//! subgraph walks per vertex.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::analysis::{self, PairPopulation};
use crate::error::{Error, Result};
use crate::graph::{EdgeOrigin, GraphView, NodeKind, Pair, TypedGraph};
use crate::ingest::{build_custom_subgraph, build_graph, enrich_graph, split_subgraph, CustomSet, Normalizer, SubgraphSplit, TrialRecord};
use crate::recommend::{self, candidate_pool, PoolMode, PrecisionSeries, RankedLink};
use crate::trainer::{self, EmbeddingTable, TrainConfig, TrainedModel};
use crate::walks::{generate_joint_corpus, generate_walks, with_threads, WalkCorpus, WalkParams, WalkTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelSelector {
    Node2vecRaw,
    Node2vecEnriched,
    Custom2vec { sub_walks: usize },
}

impl ModelSelector {
    /// The five models of the standard comparison.
    pub const STANDARD: [ModelSelector; 5] = [
        ModelSelector::Node2vecRaw,
        ModelSelector::Node2vecEnriched,
        ModelSelector::Custom2vec { sub_walks: 100 },
        ModelSelector::Custom2vec { sub_walks: 500 },
        ModelSelector::Custom2vec { sub_walks: 1000 },
    ];

    pub fn uses_split(self) -> bool {
        !matches!(self, ModelSelector::Node2vecRaw)
    }
}

impl fmt::Display for ModelSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSelector::Node2vecRaw => f.write_str("node2vec-raw"),
            ModelSelector::Node2vecEnriched => f.write_str("node2vec-enriched"),
            ModelSelector::Custom2vec { sub_walks } => write!(f, "custom2vec-{sub_walks}"),
        }
    }
}

impl FromStr for ModelSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "node2vec-raw" => Ok(ModelSelector::Node2vecRaw),
            "node2vec-enriched" => Ok(ModelSelector::Node2vecEnriched),
            other => other
                .strip_prefix("custom2vec-")
                .and_then(|n| n.parse().ok())
                .map(|sub_walks| ModelSelector::Custom2vec { sub_walks })
                .ok_or_else(|| {
                    Error::InvalidParam(format!(
                        "unknown model `{other}`; expected node2vec-raw, node2vec-enriched or custom2vec-<walks>"
                    ))
                }),
        }
    }
}

/// The graphs and split every model is trained and evaluated on.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub raw: TypedGraph,
    pub enriched: TypedGraph,
    pub split: SubgraphSplit,
}

impl Dataset {
    pub fn build(records: &[TrialRecord], normalizer: &Normalizer, custom: &CustomSet, ratio: f64, seed: u64) -> Result<Self> {
        let raw = build_graph(records, normalizer)?;
        let edges = build_custom_subgraph(&raw, custom)?;
        let split = split_subgraph(&edges, ratio, seed)?;
        Self::from_parts(raw, split)
    }

    pub fn from_parts(raw: TypedGraph, split: SubgraphSplit) -> Result<Self> {
        if raw.edges().iter().any(|e| e.origin != EdgeOrigin::Native) {
            return Err(Error::Inconsistent("raw graph contains non-native edges".into()));
        }
        let enriched = enrich_graph(&raw, &split.train_edges)?;
        Ok(Dataset { raw, enriched, split })
    }

    /// From a stored graph whose custom edges are the train links.
    pub fn from_stored(stored: TypedGraph, split: SubgraphSplit) -> Result<Self> {
        let mut custom: Vec<Pair> = stored
            .edges()
            .iter()
            .filter(|e| e.origin == EdgeOrigin::Custom)
            .map(|e| e.pair())
            .collect();
        custom.sort_unstable();
        if custom != split.train_edges {
            return Err(Error::Inconsistent(
                "custom edges in the graph do not match the train links of the split".into(),
            ));
        }
        Ok(Dataset {
            raw: stored.with_origin(EdgeOrigin::Native),
            enriched: stored,
            split,
        })
    }

    pub fn train_view(&self) -> Result<GraphView> {
        self.enriched.subgraph_view(&self.split.vertex_set, &self.split.train_edges)
    }

    pub fn test_set(&self) -> HashSet<Pair> {
        self.split.test_edges.iter().copied().collect()
    }
}

/// Walk corpus for `model`. Sub walks share every parameter with full walks
/// except the per-vertex count.
pub fn model_corpus(dataset: &Dataset, model: ModelSelector, walk: &WalkParams) -> Result<WalkCorpus> {
    match model {
        ModelSelector::Node2vecRaw => generate_walks(&dataset.raw, walk, WalkTag::Full),
        ModelSelector::Node2vecEnriched => generate_walks(&dataset.enriched, walk, WalkTag::Full),
        ModelSelector::Custom2vec { sub_walks } => {
            let sub = WalkParams {
                num_walks: sub_walks,
                ..*walk
            };
            generate_joint_corpus(&dataset.enriched, &dataset.train_view()?, walk, &sub)
        }
    }
}

/// Walks and trains `model`. Walk generation runs on `train.threads` workers;
/// the corpus is identical for any worker count.
pub fn train_model(dataset: &Dataset, model: ModelSelector, walk: &WalkParams, train: &TrainConfig) -> Result<TrainedModel> {
    with_threads(train.threads, || {
        let corpus = model_corpus(dataset, model, walk)?;
        match model {
            ModelSelector::Node2vecRaw => trainer::train(&corpus, &dataset.raw, None, train),
            ModelSelector::Node2vecEnriched => trainer::train(&corpus, &dataset.enriched, None, train),
            ModelSelector::Custom2vec { .. } => {
                let view = dataset.train_view()?;
                trainer::train(&corpus, &dataset.enriched, Some(&view), train)
            }
        }
    })?
}

/// Ranks every trial pair not linked in the enriched graph and scores the
/// top `max(ks)` against the test links.
pub fn evaluate(dataset: &Dataset, table: &EmbeddingTable, ks: &[usize]) -> Result<(Vec<RankedLink>, PrecisionSeries)> {
    let top_n = ks.iter().copied().max().ok_or_else(|| Error::InvalidParam("no k values given".into()))?;
    let pool = candidate_pool(&dataset.enriched, PoolMode::AllTrialPairs);
    let pool_size = pool.len();
    if top_n > pool_size {
        return Err(Error::InvalidParam(format!("k = {top_n} exceeds the candidate pool of {pool_size} pairs")));
    }
    let exclude: HashSet<Pair> = dataset.split.train_edges.iter().copied().collect();
    let ranked = recommend::rank_links(table, &pool, &exclude, top_n)?;
    let series = recommend::precision_at_k(&ranked, &dataset.test_set(), ks)?;
    Ok((ranked, series))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationParams {
    pub min_shared: usize,
    pub hidden_sample: usize,
    pub direct_kind: NodeKind,
    pub seed: u64,
}

impl Default for PopulationParams {
    fn default() -> Self {
        PopulationParams {
            min_shared: analysis::DEFAULT_MIN_SHARED,
            hidden_sample: analysis::DEFAULT_HIDDEN_SAMPLE,
            direct_kind: NodeKind::Endpoint,
            seed: 0,
        }
    }
}

/// Custom train, custom test, hidden native trial pairs and direct native
/// trial-attribute links. Native populations come from the raw graph; hidden
/// pairs inside the custom set are left to the custom populations.
pub fn analysis_populations(dataset: &Dataset, params: &PopulationParams) -> Result<Vec<PairPopulation>> {
    let [train, test] = analysis::custom_populations(&dataset.split);
    let hidden = analysis::native_hidden_pairs(
        &dataset.raw,
        params.min_shared,
        params.hidden_sample,
        params.seed,
        &dataset.split.vertex_set,
    )?;
    let direct = analysis::native_direct_pairs(&dataset.raw, params.direct_kind)?;
    Ok(vec![train, test, hidden, direct])
}
