//! Skip-gram negative-sampling objective.
//!
//! For a center `c`, a positive context `x` and negatives `n_1..n_k`:
//!
//! ```text
//! loss = -ln σ(w_c·h_x) - Σ_i ln σ(-w_c·h_{n_i})
//! ```
//!
//! `w` rows come from the node embedding table and `h` rows from the context
//! table. Passing the same table for both gives the single-table objective.

use crate::error::Result;
use crate::graph::NodeId;
use crate::walks::{WalkCorpus, WalkTag};

use super::EmbeddingTable;

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Skip-gram pairs of a corpus: `(walk[i], walk[j], tag)` for `0 < |i - j| <= window`.
pub fn extract_pairs(corpus: &WalkCorpus, window: usize) -> impl Iterator<Item = (NodeId, NodeId, WalkTag)> + '_ {
    corpus.iter().flat_map(move |(tag, walk)| {
        (0..walk.len()).flat_map(move |i| {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(walk.len() - 1);
            (lo..=hi).filter(move |&j| j != i).map(move |j| (walk[i], walk[j], tag))
        })
    })
}

/// Number of pairs [`extract_pairs`] yields for one walk of `len` nodes.
pub(crate) fn pairs_in_walk(len: usize, window: usize) -> u64 {
    (0..len)
        .map(|i| ((i + window).min(len.saturating_sub(1)) - i.saturating_sub(window)) as u64)
        .sum()
}

pub fn pair_loss(
    words: &EmbeddingTable,
    contexts: &EmbeddingTable,
    center: NodeId,
    context: NodeId,
    negatives: &[NodeId],
) -> Result<f64> {
    let zc = words.checked_row(center)?;
    let mut loss = softplus(-dot(zc, contexts.checked_row(context)?));
    for &n in negatives {
        loss += softplus(dot(zc, contexts.checked_row(n)?));
    }
    Ok(loss)
}

/// Partial derivatives of [`pair_loss`]: `center` with respect to the
/// center's word row, `context` and `negatives` with respect to context rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub center_id: NodeId,
    pub context_id: NodeId,
    pub negative_ids: Vec<NodeId>,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

impl PairGradients {
    /// Gradient on word row `u`.
    pub fn for_word(&self, u: NodeId) -> Vec<f64> {
        if u == self.center_id {
            self.center.clone()
        } else {
            vec![0.0; self.center.len()]
        }
    }

    /// Gradient on context row `u`, summed over the roles `u` plays.
    pub fn for_context(&self, u: NodeId) -> Vec<f64> {
        let mut g = vec![0.0; self.center.len()];
        let mut add = |v: &[f64]| g.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        if u == self.context_id {
            add(&self.context);
        }
        for (&id, grad) in self.negative_ids.iter().zip(&self.negatives) {
            if id == u {
                add(grad);
            }
        }
        g
    }

    /// Total gradient on row `u` when word and context rows are one table.
    pub fn for_row(&self, u: NodeId) -> Vec<f64> {
        let mut g = self.for_word(u);
        g.iter_mut().zip(self.for_context(u)).for_each(|(a, b)| *a += b);
        g
    }
}

pub fn pair_gradients(
    words: &EmbeddingTable,
    contexts: &EmbeddingTable,
    center: NodeId,
    context: NodeId,
    negatives: &[NodeId],
) -> Result<PairGradients> {
    let zc = words.checked_row(center)?;
    let zx = contexts.checked_row(context)?;
    let d = words.dim();

    // d/ds softplus(-s) = σ(s) - 1
    let gx = sigmoid(dot(zc, zx)) - 1.0;
    let mut center_grad: Vec<f64> = zx.iter().map(|v| gx * v).collect();
    let context_grad: Vec<f64> = zc.iter().map(|v| gx * v).collect();
    let mut negative_grads = Vec::with_capacity(negatives.len());
    for &n in negatives {
        let zn = contexts.checked_row(n)?;
        let gn = sigmoid(dot(zc, zn));
        for k in 0..d {
            center_grad[k] += gn * zn[k];
        }
        negative_grads.push(zc.iter().map(|v| gn * v).collect());
    }
    Ok(PairGradients {
        center_id: center,
        context_id: context,
        negative_ids: negatives.to_vec(),
        center: center_grad,
        context: context_grad,
        negatives: negative_grads,
    })
}
