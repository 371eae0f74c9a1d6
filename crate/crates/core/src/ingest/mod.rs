//! Record ingestion: trial records into the typed graph, plus the
//! user-preference subgraph (complete graph over a custom trial set), its
//! train/test split, and the enriched graph built from the train links.

mod custom;
mod normalize;
mod records;

pub use custom::{
    build_custom_subgraph, enrich_graph, split_subgraph, train_size, CustomSet, SubgraphSplit, SPLIT_FILE,
};
pub use normalize::Normalizer;
pub use records::{parse_records, write_records, TrialRecord};

use crate::error::Result;
use crate::graph::{EdgeOrigin, NodeKind, TypedGraph};

/// One trial node per record, one node per distinct `(kind, label)`, and a
/// native edge from each trial to each of its attributes.
pub fn build_graph(records: &[TrialRecord], normalizer: &Normalizer) -> Result<TypedGraph> {
    let mut graph = TypedGraph::new();
    for record in records {
        let trial = graph.add_node(NodeKind::Trial, &normalizer.normalize(&record.trial_id, NodeKind::Trial)?)?;
        let attributes = [
            (NodeKind::Indication, record.indications.as_slice()),
            (NodeKind::Intervention, record.interventions.as_slice()),
            (NodeKind::Phase, std::slice::from_ref(&record.phase)),
            (NodeKind::Sponsor, record.sponsors.as_slice()),
            (NodeKind::Endpoint, record.endpoints.as_slice()),
        ];
        for (kind, values) in attributes {
            for raw in values {
                let label = normalizer.normalize(raw, kind)?;
                let node = graph.add_node(kind, &label)?;
                graph.add_edge(trial, node, EdgeOrigin::Native)?;
            }
        }
    }
    Ok(graph)
}
