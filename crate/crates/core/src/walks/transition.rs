use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{NodeId, Topology};
use crate::sampling::AliasTable;

/// Second-order transition structure for `(p, q)`-biased walks.
///
/// For a walker that arrived at `v` from `t`, a neighbor `x` of `v` gets
/// unnormalized weight `1/p` if `x == t`, `1` if `x` is adjacent to `t`, and
/// `1/q` otherwise. When `p == q == 1` every weight is 1 and the tables
/// collapse to uniform neighbor sampling, so nothing is materialized.
#[derive(Debug, Clone)]
pub struct TransitionTables {
    p: f64,
    q: f64,
    biased: Option<Vec<Vec<AliasTable>>>,
}

impl TransitionTables {
    pub fn build<G: Topology>(graph: &G, p: f64, q: f64) -> Result<Self> {
        check_bias(p, q)?;
        if graph.vertices().is_empty() {
            return Err(Error::InvalidParam("cannot build transition tables for an empty graph".into()));
        }
        if p == 1.0 && q == 1.0 {
            return Ok(TransitionTables { p, q, biased: None });
        }
        let tables = (0..graph.id_space())
            .into_par_iter()
            .map(|v| {
                let v = NodeId::from(v);
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&t| AliasTable::new(&bias_weights(graph, t, v, p, q)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TransitionTables {
            p,
            q,
            biased: Some(tables),
        })
    }

    pub fn is_uniform(&self) -> bool {
        self.biased.is_none()
    }

    pub fn params(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    /// Draws the successor of `current`. `previous` is `None` on the first step,
    /// which is always uniform over neighbors. Returns `None` at a dead end.
    #[inline]
    pub fn sample_next<G: Topology, R: Rng + ?Sized>(
        &self,
        graph: &G,
        previous: Option<NodeId>,
        current: NodeId,
        rng: &mut R,
    ) -> Option<NodeId> {
        let nbrs = graph.neighbors(current);
        if nbrs.is_empty() {
            return None;
        }
        let idx = match (&self.biased, previous) {
            (Some(tables), Some(prev)) => {
                let pos = nbrs
                    .binary_search(&prev)
                    .expect("walk stepped along a non-edge");
                tables[current.index()][pos].sample(rng)
            }
            _ => rng.random_range(0..nbrs.len()),
        };
        Some(nbrs[idx])
    }

    /// Normalized next-step distribution over `graph.neighbors(current)`.
    pub fn next_step_probabilities<G: Topology>(
        &self,
        graph: &G,
        previous: Option<NodeId>,
        current: NodeId,
    ) -> Vec<f64> {
        let nbrs = graph.neighbors(current);
        match (&self.biased, previous) {
            (Some(tables), Some(prev)) => {
                let pos = nbrs.binary_search(&prev).expect("previous must neighbor current");
                tables[current.index()][pos].probabilities()
            }
            _ => vec![1.0 / nbrs.len() as f64; nbrs.len()],
        }
    }
}

pub(crate) fn check_bias(p: f64, q: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0 && q.is_finite() && q > 0.0) {
        return Err(Error::InvalidParam(format!("p and q must be positive, got p={p}, q={q}")));
    }
    Ok(())
}

fn bias_weights<G: Topology>(graph: &G, prev: NodeId, current: NodeId, p: f64, q: f64) -> Vec<f64> {
    graph
        .neighbors(current)
        .iter()
        .map(|&x| {
            if x == prev {
                1.0 / p
            } else if graph.contains_edge(prev, x) {
                1.0
            } else {
                1.0 / q
            }
        })
        .collect()
}
