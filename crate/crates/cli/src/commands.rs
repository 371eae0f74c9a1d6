use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use custom2vec_core::analysis::{self, model_stats, ModelStats};
use custom2vec_core::graph::{read_graph, write_graph};
use custom2vec_core::ingest::{parse_records, write_records, CustomSet, Normalizer, SubgraphSplit, SPLIT_FILE};
use custom2vec_core::pipeline::{self, analysis_populations, Dataset, ModelSelector, PopulationParams};
use custom2vec_core::recommend::{write_precision, write_recommendations, PrecisionSeries};
use custom2vec_core::synthetic::{self, SynthConfig};
use custom2vec_core::trainer::SubNegatives;
use custom2vec_core::walks::with_threads;
use custom2vec_core::{ContextVectors, EmbeddingTable, NodeKind, TrainConfig, TypedGraph, WalkParams};

use crate::config::UsageError;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const CUSTOM_FILE: &str = "custom.txt";
pub const EMBEDDING_EXT: &str = "emb";

#[derive(Debug, Parser)]
#[command(name = "custom2vec", version, about = "Customized graph embeddings for trial recommendation")]
pub struct Cli {
    /// Seed for generation, splitting, walks, training and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 1 gives byte-identical reruns.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// `key = value` file whose keys mirror the long flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic trial records with a planted custom cluster.
    Synth(SynthArgs),
    /// Build the graph files and the train/test split manifest.
    Build(BuildArgs),
    /// Train embeddings for one model.
    Train(TrainArgs),
    /// Rank trial pairs and report precision@k against the test links.
    Evaluate(EvaluateArgs),
    /// Similarity statistics, histograms and model comparison.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Desk,
    Registry,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "desk")]
    pub preset: Preset,
    #[arg(long)]
    pub n_trials: Option<usize>,
    #[arg(long)]
    pub cluster_size: Option<usize>,
    #[arg(long)]
    pub marker_strength: Option<f64>,
    #[arg(long)]
    pub zipf_exponent: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Trial records, one JSON object per line.
    #[arg(long)]
    pub records: PathBuf,
    /// Custom trial ids, one per line.
    #[arg(long)]
    pub custom: PathBuf,
    /// Optional `raw<TAB>canonical` synonym dictionary.
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    pub split_ratio: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 16)]
    pub walk_length: usize,
    /// Full-graph walks per node.
    #[arg(long, default_value_t = 100)]
    pub num_walks: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ContextArg {
    Separate,
    Shared,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SubNegativesArg {
    Subgraph,
    Graph,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub graph_dir: PathBuf,
    /// node2vec-raw, node2vec-enriched or custom2vec-<subgraph walks>.
    #[arg(long)]
    pub model: String,
    /// Output path; defaults to `<graph-dir>/<model>.emb`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sub_loss_weight: f64,
    #[arg(long, default_value_t = 100.0)]
    pub max_row_norm: f64,
    #[arg(long, default_value_t = 1.0)]
    pub degree_exponent: f64,
    /// Score contexts against the embedding rows or a separate table.
    #[arg(long, value_enum, default_value = "shared")]
    pub context_vectors: ContextArg,
    /// Negative distribution for subgraph-walk pairs.
    #[arg(long, value_enum, default_value = "graph")]
    pub sub_negatives: SubNegativesArg,
    /// Also write the walk corpus to this path.
    #[arg(long)]
    pub dump_walks: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub graph_dir: PathBuf,
    /// Embedding files; the file stem names the model.
    #[arg(long, required = true, value_delimiter = ',')]
    pub embeddings: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "10,50,100,1000")]
    pub ks: Vec<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub graph_dir: PathBuf,
    #[arg(long, required = true, value_delimiter = ',')]
    pub embeddings: Vec<PathBuf>,
    /// Model compared against; defaults to node2vec-raw when present, else the first file.
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long, default_value_t = analysis::DEFAULT_MIN_SHARED)]
    pub min_shared: usize,
    #[arg(long, default_value_t = analysis::DEFAULT_HIDDEN_SAMPLE)]
    pub hidden_sample: usize,
    #[arg(long, default_value = "endpoint")]
    pub direct_kind: NodeKind,
    #[arg(long, default_value_t = analysis::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = analysis::DEFAULT_DELTA_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.threads == 0 {
        return Err(UsageError("--threads must be >= 1".into()).into());
    }
    match cli.command {
        Command::Synth(a) => synth(a, cli.seed),
        Command::Build(a) => build(a, cli.seed),
        Command::Train(a) => train(a, cli.seed, cli.threads),
        Command::Evaluate(a) => evaluate(a, cli.threads),
        Command::Analyze(a) => analyze(a, cli.seed, cli.threads),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>) -> anyhow::Result<()> {
    let mut out = create(path)?;
    f(&mut out)?;
    out.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn synth(a: SynthArgs, seed: u64) -> anyhow::Result<()> {
    let mut config = match a.preset {
        Preset::Desk => SynthConfig::default(),
        Preset::Registry => SynthConfig::registry_scale(),
    };
    config.seed = seed;
    if let Some(n) = a.n_trials {
        config.n_trials = n;
    }
    if let Some(c) = a.cluster_size {
        config.cluster_size = c;
    }
    if let Some(s) = a.marker_strength {
        config.marker_strength = s;
    }
    if let Some(z) = a.zipf_exponent {
        config.zipf_exponent = z;
    }
    let (records, custom) = synthetic::generate(&config)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    let records_path = a.out_dir.join(RECORDS_FILE);
    write_with(&records_path, |out| Ok(write_records(&records, out)?))?;
    let custom_path = a.out_dir.join(CUSTOM_FILE);
    write_with(&custom_path, |out| Ok(custom.write(out)?))?;
    println!("wrote {} records to {}", records.len(), records_path.display());
    println!("wrote {} custom trials to {}", custom.len(), custom_path.display());
    Ok(())
}

fn build(a: BuildArgs, seed: u64) -> anyhow::Result<()> {
    let records = parse_records(open(&a.records)?, &a.records.display().to_string())?;
    let custom = CustomSet::parse(open(&a.custom)?, &a.custom.display().to_string())?;
    let normalizer = match &a.synonyms {
        Some(p) => Normalizer::from_tsv(open(p)?, &p.display().to_string())?,
        None => Normalizer::new(),
    };
    let dataset = Dataset::build(&records, &normalizer, &custom, a.split_ratio, seed)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    write_graph(&dataset.enriched, &a.out_dir)?;
    let split_path = a.out_dir.join(SPLIT_FILE);
    write_with(&split_path, |out| Ok(dataset.split.write_tsv(&dataset.enriched, out)?))?;
    println!(
        "graph: {} nodes, {} native + {} custom edges; split: {} train / {} test links",
        dataset.raw.node_count(),
        dataset.raw.edge_count(),
        dataset.split.train_edges.len(),
        dataset.split.train_edges.len(),
        dataset.split.test_edges.len()
    );
    Ok(())
}

fn load_split(graph: &TypedGraph, dir: &Path) -> anyhow::Result<SubgraphSplit> {
    let path = dir.join(SPLIT_FILE);
    if !path.exists() {
        return Err(UsageError(format!("split manifest {} not found; run `build` first", path.display())).into());
    }
    Ok(SubgraphSplit::read_tsv(graph, open(&path)?, &path.display().to_string())?)
}

fn load_dataset(dir: &Path) -> anyhow::Result<Dataset> {
    let stored = read_graph(dir)?;
    let split = load_split(&stored, dir)?;
    Ok(Dataset::from_stored(stored, split)?)
}

fn model_name(path: &Path) -> anyhow::Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| UsageError(format!("cannot derive a model name from {}", path.display())).into())
}

fn train(a: TrainArgs, seed: u64, threads: usize) -> anyhow::Result<()> {
    let model: ModelSelector = a.model.parse()?;
    let dataset = load_dataset(&a.graph_dir)?;
    let walk = WalkParams {
        p: a.walk.p,
        q: a.walk.q,
        walk_length: a.walk.walk_length,
        num_walks: a.walk.num_walks,
        seed,
    };
    let config = TrainConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        lr0: a.lr,
        epochs: a.epochs,
        seed,
        sub_loss_weight: a.sub_loss_weight,
        max_row_norm: a.max_row_norm,
        degree_exponent: a.degree_exponent,
        threads,
        context: match a.context_vectors {
            ContextArg::Separate => ContextVectors::Separate,
            ContextArg::Shared => ContextVectors::Shared,
        },
        sub_negatives: match a.sub_negatives {
            SubNegativesArg::Subgraph => SubNegatives::Subgraph,
            SubNegativesArg::Graph => SubNegatives::Graph,
        },
    };
    config.validate()?;
    walk.validate()?;
    if let Some(path) = &a.dump_walks {
        let corpus = with_threads(threads, || pipeline::model_corpus(&dataset, model, &walk))??;
        write_with(path, |out| Ok(corpus.write_dump(out)?))?;
    }
    let trained = pipeline::train_model(&dataset, model, &walk, &config)?;
    let out = a
        .out
        .unwrap_or_else(|| a.graph_dir.join(format!("{model}.{EMBEDDING_EXT}")));
    write_with(&out, |w| Ok(trained.embeddings.write_text(&dataset.enriched, w)?))?;
    println!("trained {model}: {} x {} -> {}", trained.embeddings.rows(), trained.embeddings.dim(), out.display());
    Ok(())
}

fn read_embeddings(graph: &TypedGraph, path: &Path) -> anyhow::Result<EmbeddingTable> {
    Ok(EmbeddingTable::read_text(graph, open(path)?, &path.display().to_string())?)
}

fn write_grid(rows: &[(String, PrecisionSeries)], out: &mut impl Write) -> anyhow::Result<()> {
    let Some((_, first)) = rows.first() else {
        return Ok(());
    };
    write!(out, "model")?;
    for k in &first.ks {
        write!(out, "\tP@{k}")?;
    }
    writeln!(out)?;
    for (name, series) in rows {
        write!(out, "{name}")?;
        for p in &series.precision {
            write!(out, "\t{p:.4}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs, threads: usize) -> anyhow::Result<()> {
    let dataset = load_dataset(&a.graph_dir)?;
    let test = dataset.test_set();
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    let mut grid = Vec::new();
    for path in &a.embeddings {
        let name = model_name(path)?;
        let table = read_embeddings(&dataset.enriched, path)?;
        let (ranked, series) = with_threads(threads, || pipeline::evaluate(&dataset, &table, &a.ks))??;
        write_with(&a.out_dir.join(format!("recommendations_{name}.tsv")), |out| {
            Ok(write_recommendations(&dataset.enriched, &ranked, &test, out)?)
        })?;
        write_with(&a.out_dir.join(format!("precision_{name}.tsv")), |out| Ok(write_precision(&series, out)?))?;
        let summary: Vec<String> = series
            .ks
            .iter()
            .zip(&series.precision)
            .map(|(k, p)| format!("P@{k}={p:.3}"))
            .collect();
        println!("{name}: {}", summary.join(" "));
        grid.push((name, series));
    }
    write_with(&a.out_dir.join("precision.tsv"), |out| write_grid(&grid, out))?;
    Ok(())
}

fn analyze(a: AnalyzeArgs, seed: u64, threads: usize) -> anyhow::Result<()> {
    let dataset = load_dataset(&a.graph_dir)?;
    let params = PopulationParams {
        min_shared: a.min_shared,
        hidden_sample: a.hidden_sample,
        direct_kind: a.direct_kind,
        seed,
    };
    let pops = analysis_populations(&dataset, &params)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;

    let mut models: Vec<ModelStats> = Vec::new();
    for path in &a.embeddings {
        let mut name = model_name(path)?;
        // the same file given twice still needs distinct model names
        let base = name.clone();
        let mut n = 1;
        while models.iter().any(|m| m.model == name) {
            n += 1;
            name = format!("{base}#{n}");
        }
        let table = read_embeddings(&dataset.enriched, path)?;
        let stats = with_threads(threads, || model_stats(&name, &table, &pops, a.bins))??;
        for (kind, s) in &stats.populations {
            let hist_path = a.out_dir.join(analysis::histogram_file_name(&name, *kind));
            write_with(&hist_path, |out| Ok(analysis::write_histogram(&s.histogram, out)?))?;
        }
        models.push(stats);
    }
    write_with(&a.out_dir.join("stats.tsv"), |out| Ok(analysis::write_stats(&models, out)?))?;

    if models.len() >= 2 {
        let baseline = a.baseline.clone().unwrap_or_else(|| {
            let raw = ModelSelector::Node2vecRaw.to_string();
            if models.iter().any(|m| m.model == raw) {
                raw
            } else {
                models[0].model.clone()
            }
        });
        let rows = analysis::compare_models(&models, &baseline, a.threshold)?;
        write_with(&a.out_dir.join("compare.tsv"), |out| Ok(analysis::write_comparison(&rows, out)?))?;
        for r in rows.iter().filter(|r| r.flagged) {
            println!(
                "flagged: {} shifts {} mean by {:+.4} against {baseline}",
                r.model, r.population, r.delta_mean
            );
        }
    }
    println!(
        "analyzed {} models over {} populations into {}",
        models.len(),
        pops.len(),
        a.out_dir.display()
    );
    Ok(())
}
