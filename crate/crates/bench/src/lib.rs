//! Shared fixtures for the criterion benchmarks.

use custom2vec_core::ingest::Normalizer;
use custom2vec_core::synthetic::{generate, SynthConfig};
use custom2vec_core::Dataset;

/// The default synthetic scenario with `n_trials` trials.
pub fn scenario(n_trials: usize, seed: u64) -> Dataset {
    let config = SynthConfig {
        n_trials,
        seed,
        ..SynthConfig::default()
    };
    let (records, custom) = generate(&config).expect("valid synthetic config");
    Dataset::build(&records, &Normalizer::new(), &custom, 0.8, seed).expect("synthetic data builds")
}
