//! Customized knowledge-graph embeddings for clinical-trial recommendation.
//!
//! Trial records become a typed graph; a user-vetted set of trials becomes a
//! complete preference subgraph whose links are split into train and test.
//! Embeddings are learned with skip-gram negative sampling over biased random
//! walks on the graph enriched with the train links, optionally joined with
//! walks confined to the preference subgraph. Trial pairs are then ranked by
//! cosine similarity and scored against the held-out links.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod recommend;
pub mod sampling;
pub mod synthetic;
pub mod trainer;
pub mod walks;

pub use error::{Error, ErrorCategory, Result};
pub use pipeline::{Dataset, ModelSelector};
pub use graph::{Edge, EdgeOrigin, GraphView, Node, NodeId, NodeKind, Pair, Topology, TypedGraph};
pub use trainer::{ContextVectors, EmbeddingTable, TrainConfig, TrainedModel};
pub use walks::{WalkCorpus, WalkParams, WalkTag};
