use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tdam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdam"))
        .current_dir(dir)
        .env_remove("TDAM_THREADS")
        .args(["--quiet"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_line(out: &Output) -> (String, String) {
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().find(|l| l.starts_with("error\t")).expect("machine-readable error line").to_string();
    let fields: Vec<&str> = line.splitn(3, '\t').collect();
    assert_eq!(fields.len(), 3, "{line}");
    (fields[1].to_string(), fields[2].to_string())
}

/// Small separable corpus plus a quick training config naming it.
fn fixture() -> TempDir {
    let dir = TempDir::new().unwrap();
    ok(&tdam(
        dir.path(),
        &["synth-corpus", "--out", "corpus.tsv", "--docs", "40", "--seed", "3", "--separable", "--annotate"],
    ));
    fs::write(
        dir.path().join("fixture.cfg"),
        "# quick run\ncorpus=corpus.tsv\nmax_epochs=3\nhidden_size=6\nembedding_dim=8\ntopics=3\nbatch_size=8\n",
    )
    .unwrap();
    dir
}

#[test]
fn training_twice_gives_identical_metrics() {
    let dir = fixture();
    ok(&tdam(dir.path(), &["train", "--config", "fixture.cfg", "--seed", "7", "--out", "a"]));
    ok(&tdam(dir.path(), &["train", "--config", "fixture.cfg", "--seed", "7", "--out", "b"]));
    let a = fs::read_to_string(dir.path().join("a/metrics.tsv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/metrics.tsv")).unwrap();
    assert_eq!(a.lines().count(), 4);
    assert_eq!(a, b);
    assert_eq!(fs::read(dir.path().join("a/model.ckpt")).unwrap(), fs::read(dir.path().join("b/model.ckpt")).unwrap());
}

#[test]
fn train_writes_manifest_with_resolved_config() {
    let dir = fixture();
    ok(&tdam(dir.path(), &["train", "--config", "fixture.cfg", "--set", "topics=2", "--seed", "5", "--out", "run"]));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "train");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config"]["topics"], "2");
    assert_eq!(m["config"]["max_epochs"], "3");
    assert!(m["checkpoint_hash"].as_str().is_some_and(|h| h.len() == 64));
    assert!(m["outputs"]["checkpoint"].as_str().unwrap().ends_with("model.ckpt"));
}

#[test]
fn eval_accuracy_on_gold_predictions_prints_one() {
    let dir = fixture();
    let corpus = fs::read_to_string(dir.path().join("corpus.tsv")).unwrap();
    let preds: String = corpus
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            format!("{}\t{}\n", f[0], f[1])
        })
        .collect();
    fs::write(dir.path().join("gold.tsv"), preds).unwrap();
    let out = tdam(dir.path(), &["eval-accuracy", "--corpus", "corpus.tsv", "--predictions", "gold.tsv"]);
    assert_eq!(ok(&out), "accuracy\tsentiment\t1.0\n");
}

#[test]
fn k_and_tune_k_conflict() {
    let dir = TempDir::new().unwrap();
    let out = tdam(dir.path(), &["cluster", "--dump", "d", "--k", "3", "--tune-k", "50,100", "--out", "x"]);
    let (kind, msg) = error_line(&out);
    assert_eq!(kind, "usage");
    assert!(msg.contains("--tune-k"), "{msg}");
}

#[test]
fn missing_input_is_a_one_line_error() {
    let dir = TempDir::new().unwrap();
    let out = tdam(dir.path(), &["coherence", "--topics", "none.txt", "--reference", "none.tsv"]);
    let (kind, _) = error_line(&out);
    assert_eq!(kind, "io");
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().filter(|l| l.starts_with("error")).count(), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let (kind, _) = error_line(&tdam(dir.path(), &["train", "--bogus"]));
    assert_eq!(kind, "usage");
}

#[test]
fn extraction_pipeline_runs_end_to_end() {
    let dir = fixture();
    let p = dir.path();
    ok(&tdam(p, &["train", "--config", "fixture.cfg", "--multitask", "--out", "run"]));
    ok(&tdam(p, &["dump-embeddings", "--checkpoint", "run/model.ckpt", "--corpus", "corpus.tsv", "--out", "words.dump"]));
    let corpus_before = fs::read(p.join("corpus.tsv")).unwrap();

    let stdout = ok(&tdam(
        p,
        &["cluster", "--dump", "words.dump", "--tune-k", "2,3", "--projection", "pca", "--reference", "corpus.tsv", "--out", "topics.tsv"],
    ));
    assert!(stdout.lines().any(|l| l.starts_with("selected_k\ttune-k\t")), "{stdout}");
    let topics = fs::read_to_string(p.join("topics.tsv")).unwrap();
    assert!(topics.lines().all(|l| l.split('\t').count() == 4));
    assert!(p.join("topics.tsv.manifest.json").exists());

    let stdout = ok(&tdam(p, &["coherence", "--topics", "topics.tsv", "--reference", "corpus.tsv"]));
    assert!(stdout.lines().any(|l| l.starts_with("coherence\tmean\t")), "{stdout}");

    ok(&tdam(
        p,
        &["dump-embeddings", "--checkpoint", "run/model.ckpt", "--corpus", "corpus.tsv", "--level", "sentence", "--out", "sent.dump"],
    ));
    ok(&tdam(p, &["cluster", "--dump", "sent.dump", "--level", "sentence", "--k", "3", "--projection", "pca", "--out", "sent.tsv"]));
    let stdout = ok(&tdam(p, &["aspect-coherence", "--clusters", "sent.tsv", "--corpus", "corpus.tsv"]));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("aspect_ratio\t")).count(), 5);

    ok(&tdam(p, &["export-attention", "--checkpoint", "run/model.ckpt", "--corpus", "corpus.tsv", "--out", "att.tsv"]));
    let att = fs::read_to_string(p.join("att.tsv")).unwrap();
    assert!(att.starts_with("doc_id\tlevel\tsentence\tposition\tmember\tbeta\talpha\n"));

    assert_eq!(fs::read(p.join("corpus.tsv")).unwrap(), corpus_before, "inputs must not be modified");
}

#[test]
fn checkpoint_accuracy_is_reported_for_both_tasks() {
    let dir = fixture();
    ok(&tdam(dir.path(), &["train", "--config", "fixture.cfg", "--multitask", "--out", "run"]));
    let stdout = ok(&tdam(dir.path(), &["eval-accuracy", "--corpus", "corpus.tsv", "--checkpoint", "run/model.ckpt"]));
    let metrics: Vec<&str> = stdout.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(metrics, ["sentiment", "domain"]);
}
