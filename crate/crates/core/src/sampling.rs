//! Discrete sampling and seed derivation shared by the walker and the trainer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type DetRng = ChaCha8Rng;

/// Mixes `parts` into `base` to give an independent, order-free seed per work item.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    // splitmix64 finalizer applied after each absorbed word
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let mut state = mix(base.wrapping_add(0x9e37_79b9_7f4a_7c15));
    for &p in parts {
        state = mix(state ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    state
}

pub fn rng_for(base: u64, parts: &[u64]) -> DetRng {
    DetRng::seed_from_u64(derive_seed(base, parts))
}

/// Walker/Vose alias table: `O(n)` construction, `O(1)` draws.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Builds a table from non-negative, not-all-zero weights.
    pub fn new(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidParam("alias table needs at least one weight".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParam("alias weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParam("alias weights sum to zero".into()));
        }

        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0u32; n];
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
            alias[i] = i as u32;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(&vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }

    /// Exact probability of every outcome as encoded by the table.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.prob.len() as f64;
        let mut p = vec![0.0; self.prob.len()];
        for (i, (&keep, &alt)) in self.prob.iter().zip(&self.alias).enumerate() {
            p[i] += keep / n;
            p[alt as usize] += (1.0 - keep) / n;
        }
        p
    }
}
