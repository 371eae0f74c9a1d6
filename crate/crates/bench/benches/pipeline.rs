use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use custom2vec_bench::scenario;
use custom2vec_core::pipeline::{evaluate, model_corpus, train_model};
use custom2vec_core::{ModelSelector, TrainConfig, WalkParams};

fn walks(c: &mut Criterion) {
    let data = scenario(500, 0);
    let mut group = c.benchmark_group("walks");
    group.sample_size(10);
    for (p, q) in [(1.0, 1.0), (0.5, 2.0)] {
        let params = WalkParams { p, q, num_walks: 10, ..WalkParams::default() };
        group.bench_with_input(BenchmarkId::new("enriched", format!("p{p}-q{q}")), &params, |b, params| {
            b.iter(|| model_corpus(&data, ModelSelector::Node2vecEnriched, params).unwrap())
        });
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let data = scenario(500, 0);
    let walk = WalkParams { num_walks: 10, ..WalkParams::default() };
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for model in [ModelSelector::Node2vecEnriched, ModelSelector::Custom2vec { sub_walks: 100 }] {
        for threads in [1, 4] {
            let config = TrainConfig { threads, ..TrainConfig::default() };
            group.bench_function(BenchmarkId::new(model.to_string(), threads), |b| {
                b.iter(|| train_model(&data, model, &walk, &config).unwrap())
            });
        }
    }
    group.finish();
}

fn ranking(c: &mut Criterion) {
    let data = scenario(1000, 0);
    let walk = WalkParams { num_walks: 5, ..WalkParams::default() };
    let table = train_model(&data, ModelSelector::Node2vecEnriched, &walk, &TrainConfig::default())
        .unwrap()
        .embeddings;
    let mut group = c.benchmark_group("rank");
    group.sample_size(10);
    group.bench_function("all-trial-pairs-top1000", |b| {
        b.iter(|| evaluate(&data, &table, &[10, 100, 1000]).unwrap())
    });
    group.finish();
}

criterion_group!(benches, walks, training, ranking);
criterion_main!(benches);
