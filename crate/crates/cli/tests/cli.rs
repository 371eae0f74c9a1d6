use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MODELS: [&str; 5] = [
    "node2vec-raw",
    "node2vec-enriched",
    "custom2vec-100",
    "custom2vec-500",
    "custom2vec-1000",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_custom2vec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthesizes a small scenario and builds its graph; returns (data, graph) dirs.
fn prepare(root: &Path, seed: &str) -> (PathBuf, PathBuf) {
    let data = root.join("data");
    let graph = root.join("graph");
    ok(&["--seed", seed, "synth", "--out-dir", s(&data), "--n-trials", "120", "--cluster-size", "12"]);
    ok(&[
        "--seed",
        seed,
        "build",
        "--records",
        s(&data.join("records.jsonl")),
        "--custom",
        s(&data.join("custom.txt")),
        "--out-dir",
        s(&graph),
    ]);
    (data, graph)
}

fn train(graph: &Path, model: &str, seed: &str) -> PathBuf {
    let out = graph.join(format!("{model}.emb"));
    ok(&[
        "--seed",
        seed,
        "train",
        "--graph-dir",
        s(graph),
        "--model",
        model,
        "--num-walks",
        "5",
        "--out",
        s(&out),
    ]);
    out
}

fn full_pipeline(root: &Path) -> Vec<(String, Vec<u8>)> {
    let (_, graph) = prepare(root, "7");
    let embs: Vec<String> = MODELS
        .iter()
        .map(|m| s(&train(&graph, m, "7")).to_string())
        .collect();
    let list = embs.join(",");
    let eval = root.join("eval");
    let analysis = root.join("analysis");
    ok(&["evaluate", "--graph-dir", s(&graph), "--embeddings", &list, "--out-dir", s(&eval)]);
    ok(&["--seed", "7", "analyze", "--graph-dir", s(&graph), "--embeddings", &list, "--out-dir", s(&analysis)]);

    let mut files = Vec::new();
    for dir in [root.join("data"), graph, eval, analysis] {
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            let name = p.strip_prefix(root).unwrap().display().to_string();
            files.push((name, fs::read(&p).unwrap()));
        }
    }
    files
}

#[test]
fn pipeline_end_to_end_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = full_pipeline(a.path());
    let second = full_pipeline(b.path());

    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "data/custom.txt",
        "data/records.jsonl",
        "graph/edges.tsv",
        "graph/nodes.tsv",
        "graph/split.tsv",
        "graph/custom2vec-1000.emb",
        "eval/precision.tsv",
        "eval/precision_node2vec-raw.tsv",
        "eval/recommendations_custom2vec-100.tsv",
        "analysis/stats.tsv",
        "analysis/compare.tsv",
        "analysis/hist_node2vec-enriched_custom_test.tsv",
    ] {
        assert!(names.contains(&expected), "missing {expected}: {names:?}");
    }
    assert_eq!(first.len(), second.len());
    for ((na, da), (nb, db)) in first.iter().zip(&second) {
        assert_eq!(na, nb);
        assert!(da == db, "{na} differs between reruns");
    }

    let custom = &first.iter().find(|(n, _)| n == "data/custom.txt").unwrap().1;
    assert_eq!(String::from_utf8_lossy(custom).lines().count(), 12);

    let grid = String::from_utf8(first.iter().find(|(n, _)| n == "eval/precision.tsv").unwrap().1.clone()).unwrap();
    let lines: Vec<&str> = grid.lines().collect();
    assert_eq!(lines[0], "model\tP@10\tP@50\tP@100\tP@1000");
    assert_eq!(lines.len(), 6);

    let recs = String::from_utf8(
        first
            .iter()
            .find(|(n, _)| n == "eval/recommendations_node2vec-raw.tsv")
            .unwrap()
            .1
            .clone(),
    )
    .unwrap();
    assert_eq!(recs.lines().next().unwrap(), "rank\ttrial_u\ttrial_v\tscore\tin_test");
    assert_eq!(recs.lines().count(), 1001);
}

#[test]
fn missing_custom_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["synth", "--out-dir", s(&data), "--n-trials", "50", "--cluster-size", "5"]);
    let missing = dir.path().join("nowhere").join("custom.txt");
    let out = run(&[
        "build",
        "--records",
        s(&data.join("records.jsonl")),
        "--custom",
        s(&missing),
        "--out-dir",
        s(&dir.path().join("graph")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(s(&missing)), "{}", stderr(&out));
}

#[test]
fn config_file_supplies_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let data = dir.path().join("data");
    fs::write(&conf, format!("# small run\nn_trials = 40\ncluster_size = 6\nout_dir = {}\n", s(&data))).unwrap();
    ok(&["--config", s(&conf), "synth"]);
    let custom = fs::read_to_string(data.join("custom.txt")).unwrap();
    assert_eq!(custom.lines().count(), 6);
    let records = fs::read_to_string(data.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 40);

    // command-line flags win over the file
    ok(&["--config", s(&conf), "synth", "--cluster-size", "4"]);
    assert_eq!(fs::read_to_string(data.join("custom.txt")).unwrap().lines().count(), 4);

    fs::write(&conf, "colour = blue\n").unwrap();
    let out = run(&["--config", s(&conf), "synth", "--out-dir", s(&data)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("colour"));
}

#[test]
fn bad_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph) = prepare(dir.path(), "1");
    let emb = train(&graph, "node2vec-raw", "1");

    // corrupt the third line
    let text = fs::read_to_string(&emb).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    lines[2] = format!("{} not-a-number", lines[2].split(' ').next().unwrap());
    let bad = dir.path().join("bad.emb");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let out = run(&["evaluate", "--graph-dir", s(&graph), "--embeddings", s(&bad), "--out-dir", s(&dir.path().join("e"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.emb:3"), "{}", stderr(&out));

    let out = run(&[
        "evaluate",
        "--graph-dir",
        s(&graph),
        "--embeddings",
        s(&emb),
        "--ks",
        "10,100000000",
        "--out-dir",
        s(&dir.path().join("e")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("exceeds the candidate pool"), "{}", stderr(&out));

    let out = run(&["train", "--graph-dir", s(&graph), "--model", "word2vec"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["train", "--graph-dir", s(dir.path()), "--model", "node2vec-raw"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn same_embedding_twice_has_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph) = prepare(dir.path(), "3");
    let emb = train(&graph, "custom2vec-100", "3");
    let list = format!("{},{}", s(&emb), s(&emb));
    let out_dir = dir.path().join("a");
    ok(&["analyze", "--graph-dir", s(&graph), "--embeddings", &list, "--out-dir", s(&out_dir)]);
    let compare = fs::read_to_string(out_dir.join("compare.tsv")).unwrap();
    let mut rows = compare.lines();
    let header: Vec<&str> = rows.next().unwrap().split('\t').collect();
    let col = header.iter().position(|h| *h == "delta_mean").expect("delta_mean column");
    let mut n = 0;
    for row in rows {
        let delta: f64 = row.split('\t').nth(col).unwrap().parse().unwrap();
        assert_eq!(delta, 0.0, "{row}");
        n += 1;
    }
    assert_eq!(n, 8);
}
