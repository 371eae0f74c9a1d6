use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, Topology};
use crate::sampling::AliasTable;

/// Degree-proportional negative distribution over a node domain.
///
/// Weights are `degree^exponent`; the default exponent is 1 (plain degree).
/// Zero-degree nodes are left out of the domain.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    domain: Vec<NodeId>,
    table: AliasTable,
}

impl NegativeSampler {
    pub fn from_degrees<G: Topology>(graph: &G, exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent >= 0.0) {
            return Err(Error::InvalidParam(format!("degree exponent must be >= 0, got {exponent}")));
        }
        let (domain, weights): (Vec<NodeId>, Vec<f64>) = graph
            .vertices()
            .into_iter()
            .filter_map(|u| {
                let d = graph.degree(u);
                (d > 0).then(|| (u, (d as f64).powf(exponent)))
            })
            .unzip();
        if domain.is_empty() {
            return Err(Error::Inconsistent("negative-sampling domain has no node with positive degree".into()));
        }
        Ok(NegativeSampler {
            table: AliasTable::new(&weights)?,
            domain,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        self.domain[self.table.sample(rng)]
    }

    pub fn domain(&self) -> &[NodeId] {
        &self.domain
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.domain.binary_search(&u).is_ok()
    }

    /// `(node, probability)` for every domain node.
    pub fn distribution(&self) -> Vec<(NodeId, f64)> {
        self.domain.iter().copied().zip(self.table.probabilities()).collect()
    }
}
