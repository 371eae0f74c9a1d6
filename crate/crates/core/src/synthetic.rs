//! Seeded generator of trial-like records with a planted preference cluster.
//!
//! Attribute labels are drawn from per-kind vocabularies with Zipf-skewed
//! popularity, so a few labels (common endpoints, large sponsors) become hubs
//! while most stay rare. A random subset of trials optionally shares one
//! marker intervention and is returned as the custom set.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeKind;
use crate::ingest::{CustomSet, TrialRecord};
use crate::sampling::{rng_for, AliasTable, DetRng};

pub const MARKER_LABEL: &str = "marker intervention";

const RECORD_STREAM: u64 = 0x7e57;
const CLUSTER_STREAM: u64 = 0xc1u64;

/// Vocabulary size and per-trial draw range for one attribute kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeSpec {
    pub vocab: usize,
    pub min_per_trial: usize,
    pub max_per_trial: usize,
}

impl AttributeSpec {
    pub const fn new(vocab: usize, min_per_trial: usize, max_per_trial: usize) -> Self {
        AttributeSpec {
            vocab,
            min_per_trial,
            max_per_trial,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_trials: usize,
    pub indications: AttributeSpec,
    pub interventions: AttributeSpec,
    /// One phase per trial; only `vocab` is used.
    pub phases: AttributeSpec,
    pub sponsors: AttributeSpec,
    pub endpoints: AttributeSpec,
    pub zipf_exponent: f64,
    pub cluster_size: usize,
    /// Probability that a cluster member carries the marker intervention.
    pub marker_strength: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_trials: 500,
            indications: AttributeSpec::new(40, 1, 2),
            interventions: AttributeSpec::new(300, 1, 3),
            phases: AttributeSpec::new(5, 1, 1),
            sponsors: AttributeSpec::new(80, 1, 2),
            endpoints: AttributeSpec::new(150, 2, 5),
            zipf_exponent: 1.0,
            cluster_size: 20,
            marker_strength: 0.6,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Registry-scale preset: roughly 38k nodes and 75k edges.
    pub fn registry_scale() -> Self {
        SynthConfig {
            n_trials: 5725,
            indications: AttributeSpec::new(4000, 1, 3),
            interventions: AttributeSpec::new(15000, 1, 5),
            phases: AttributeSpec::new(8, 1, 1),
            sponsors: AttributeSpec::new(5000, 1, 3),
            endpoints: AttributeSpec::new(40000, 2, 8),
            zipf_exponent: 0.6,
            cluster_size: 57,
            ..SynthConfig::default()
        }
    }

    fn multi_kinds(&self) -> [(NodeKind, &AttributeSpec); 4] {
        [
            (NodeKind::Indication, &self.indications),
            (NodeKind::Intervention, &self.interventions),
            (NodeKind::Sponsor, &self.sponsors),
            (NodeKind::Endpoint, &self.endpoints),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.n_trials < 2 {
            return bad("n_trials must be >= 2".into());
        }
        if self.cluster_size < 2 || self.cluster_size > self.n_trials {
            return bad(format!(
                "cluster size must be between 2 and n_trials ({}), got {}",
                self.n_trials, self.cluster_size
            ));
        }
        if !(0.0..=1.0).contains(&self.marker_strength) {
            return bad(format!("marker strength must be in [0, 1], got {}", self.marker_strength));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent >= 0.0) {
            return bad(format!("zipf exponent must be >= 0, got {}", self.zipf_exponent));
        }
        if self.phases.vocab < 1 {
            return bad("phase vocabulary must be >= 1".into());
        }
        for (kind, spec) in self.multi_kinds() {
            if spec.vocab < 1 || spec.min_per_trial < 1 || spec.min_per_trial > spec.max_per_trial {
                return bad(format!("{kind}: need vocab >= 1 and 1 <= min <= max per trial"));
            }
            if spec.max_per_trial > spec.vocab {
                return bad(format!("{kind}: max per trial exceeds vocabulary size"));
            }
        }
        Ok(())
    }

    fn zipf(&self, vocab: usize) -> Vec<f64> {
        (1..=vocab).map(|k| (k as f64).powf(-self.zipf_exponent)).collect()
    }

    /// Expected node count of the graph built from [`generate`]'s records.
    pub fn expected_node_count(&self) -> f64 {
        let mut total = self.n_trials as f64;
        let mut add = |weights: Vec<f64>, draws: f64| {
            let sum: f64 = weights.iter().sum();
            total += weights.iter().map(|w| 1.0 - (1.0 - w / sum).powf(draws)).sum::<f64>();
        };
        add(self.zipf(self.phases.vocab), self.n_trials as f64);
        for (_, spec) in self.multi_kinds() {
            let mean = (spec.min_per_trial + spec.max_per_trial) as f64 / 2.0;
            add(self.zipf(spec.vocab), mean * self.n_trials as f64);
        }
        let p_marker = 1.0 - (1.0 - self.marker_strength).powf(self.cluster_size as f64);
        total + p_marker
    }
}

pub fn trial_id(i: usize) -> String {
    format!("NCT{:08}", i + 1)
}

fn distinct_labels(table: &AliasTable, kind: NodeKind, count: usize, rng: &mut DetRng) -> Vec<String> {
    let mut picked = BTreeSet::new();
    while picked.len() < count {
        picked.insert(table.sample(rng));
    }
    picked.into_iter().map(|i| format!("{kind} {}", i + 1)).collect()
}

/// Records plus the planted cluster as a custom set. Deterministic per seed.
pub fn generate(config: &SynthConfig) -> Result<(Vec<TrialRecord>, CustomSet)> {
    config.validate()?;
    let mut rng = rng_for(config.seed, &[RECORD_STREAM]);
    let phase_table = AliasTable::new(&config.zipf(config.phases.vocab))?;
    let tables = config
        .multi_kinds()
        .map(|(kind, spec)| AliasTable::new(&config.zipf(spec.vocab)).map(|t| (kind, *spec, t)));
    let [ind, int, spo, end] = tables;
    let (ind, int, spo, end) = (ind?, int?, spo?, end?);

    let mut cluster_rng = rng_for(config.seed, &[CLUSTER_STREAM]);
    let mut cluster: Vec<usize> = index::sample(&mut cluster_rng, config.n_trials, config.cluster_size).into_vec();
    cluster.sort_unstable();

    let draw = |(kind, spec, table): &(NodeKind, AttributeSpec, AliasTable), rng: &mut DetRng| {
        let count = rng.random_range(spec.min_per_trial..=spec.max_per_trial);
        distinct_labels(table, *kind, count, rng)
    };
    let mut records = Vec::with_capacity(config.n_trials);
    for i in 0..config.n_trials {
        let indications = draw(&ind, &mut rng);
        let mut interventions = draw(&int, &mut rng);
        let phase = format!("phase {}", phase_table.sample(&mut rng) + 1);
        let sponsors = draw(&spo, &mut rng);
        let endpoints = draw(&end, &mut rng);
        // drawn for every trial so background records do not depend on the cluster
        let marked = rng.random_bool(config.marker_strength);
        if marked && cluster.binary_search(&i).is_ok() {
            interventions.push(MARKER_LABEL.to_string());
        }
        records.push(TrialRecord {
            trial_id: trial_id(i),
            indications,
            interventions,
            phase,
            sponsors,
            endpoints,
        });
    }
    let custom = CustomSet::new(cluster.iter().map(|&i| trial_id(i)))?;
    Ok((records, custom))
}
