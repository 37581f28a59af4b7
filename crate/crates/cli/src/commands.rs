use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use log::{info, warn};

use tdam::corpus::{
    build_vocab, load_corpus, load_pretrained_embeddings, synthetic, Document, LabelSchema, LoadedCorpus, Vocabulary,
};
use tdam::evaluation::{
    accuracy, aspect_polarity_coherence, machine_report, mean_std, table_report, topic_coherence, AspectClusterEval,
    AspectLabel, CoherenceConfig, MetricLine,
};
use tdam::extraction::{
    collect_dump, kmeans, member_lines, projector_registry, rank_topics, ranked_lines, sentence_id, ClusterReport, Level,
    LocalEmbeddingDump, Tsne, DEFAULT_MAX_ITER,
};
use tdam::model::{encode_values, encoder_registry, Checkpoint, ForwardMode};
use tdam::training::{
    cross_validate, grid_search as run_grid, holdout_split, parse_kv, predict, train_model, ModelSpec, Objective,
    TrainConfig, METRICS_HEADER,
};

use crate::manifest::{beside, RunRecord};
use crate::{ConfigArgs, DataArgs};

const DEV_FRACTION: f64 = 0.1;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// Prints metric lines to stdout, optionally also writing them to `out`.
fn emit(lines: &[MetricLine], out: Option<&Path>, record: &mut RunRecord) -> Result<()> {
    let text = machine_report(lines);
    print!("{text}");
    if let Some(p) = out {
        write(p, &text)?;
        record.output("report", p);
        record.manifest_path = Some(beside(p));
    }
    Ok(())
}

/// Data keys a config file may carry besides training settings.
const DATA_KEYS: [&str; 3] = ["corpus", "dev", "embeddings"];

/// Input paths after merging flags with the config file.
struct DataPaths {
    corpus: PathBuf,
    dev: Option<PathBuf>,
    embeddings: Option<PathBuf>,
}

/// Defaults, then the config file, then `--set` pairs, then dedicated flags.
/// Data paths in the file are relative to the file; flags take precedence.
fn resolve_config(args: &ConfigArgs, data: &DataArgs, record: &mut RunRecord) -> Result<(TrainConfig, DataPaths)> {
    let mut cfg = TrainConfig::default();
    let mut from_file: HashMap<String, PathBuf> = HashMap::new();
    if let Some(path) = &args.config {
        let base = path.parent().unwrap_or(Path::new(""));
        let (data_pairs, pairs): (Vec<_>, Vec<_>) =
            parse_kv(&read(path)?)?.into_iter().partition(|(k, _)| DATA_KEYS.contains(&k.as_str()));
        cfg.apply(&pairs)?;
        from_file.extend(data_pairs.into_iter().map(|(k, v)| (k, base.join(v))));
        record.input("config", path);
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(e) = &args.encoder {
        cfg.encoder = e.clone();
    }
    if args.multitask {
        cfg.multitask = true;
    }
    cfg.validate()?;
    encoder_registry().get(&cfg.encoder)?;
    record.config_pairs(cfg.to_kv());
    record.seed = Some(cfg.seed);
    let paths = DataPaths {
        corpus: data
            .corpus
            .clone()
            .or_else(|| from_file.remove("corpus"))
            .context("no training corpus: pass --corpus or set corpus= in the config file")?,
        dev: data.dev.clone().or_else(|| from_file.remove("dev")),
        embeddings: data.embeddings.clone().or_else(|| from_file.remove("embeddings")),
    };
    Ok((cfg, paths))
}

struct TrainingData {
    corpus: LoadedCorpus,
    vocab: Vocabulary,
    train: Vec<Document>,
    dev: Vec<Document>,
    spec: ModelSpec,
}

fn load_training_data(data: &DataPaths, cfg: &TrainConfig, record: &mut RunRecord) -> Result<TrainingData> {
    let corpus = load_corpus(&data.corpus, &LabelSchema::default())?;
    record.input("corpus", &data.corpus);
    if !corpus.malformed.is_empty() {
        warn!("skipped {} malformed record(s) in {}", corpus.malformed.len(), data.corpus.display());
    }
    let (train_corpus, dev_corpus) = match &data.dev {
        Some(p) => {
            record.input("dev", p);
            (corpus.clone(), Some(load_corpus(p, &corpus.schema)?))
        }
        None => (corpus.clone(), None),
    };
    let mut train_records = train_corpus.records.clone();
    let mut dev_records = dev_corpus.map(|c| c.records).unwrap_or_default();
    if data.dev.is_none() {
        let (t, d) = holdout_split(train_records.len(), DEV_FRACTION, cfg.seed)?;
        dev_records = d.iter().map(|&i| train_records[i].clone()).collect();
        train_records = t.iter().map(|&i| train_records[i].clone()).collect();
    }
    let vocab = build_vocab(train_records.iter().flat_map(|r| r.sentences.iter()), cfg.min_count);
    let to_docs = |records: Vec<tdam::corpus::TokenizedRecord>| {
        LoadedCorpus {
            records,
            schema: corpus.schema.clone(),
            malformed: Vec::new(),
        }
        .documents(&vocab)
    };
    let train = to_docs(train_records);
    let dev = to_docs(dev_records);
    let pretrained = match &data.embeddings {
        Some(p) => {
            record.input("embeddings", p);
            let table = load_pretrained_embeddings(p, &vocab, cfg.embedding_dim, cfg.seed)?;
            info!("pretrained vectors cover {:.1}% of the vocabulary", 100.0 * table.coverage());
            Some(table.table)
        }
        None => None,
    };
    info!("{} training and {} dev documents, vocabulary {}", train.len(), dev.len(), vocab.len());
    let spec = ModelSpec {
        vocab: vocab.len(),
        sentiment_classes: corpus.schema.sentiment.len(),
        domain_classes: corpus.schema.domains.len(),
        pretrained,
    };
    Ok(TrainingData {
        corpus,
        vocab,
        train,
        dev,
        spec,
    })
}

fn save_checkpoint(
    path: &Path,
    params: tdam::model::TdamParams,
    cfg: &TrainConfig,
    data: &TrainingData,
    record: &mut RunRecord,
) -> Result<()> {
    let ckpt = Checkpoint {
        params,
        encoder: cfg.encoder.clone(),
        vocab: data.vocab.clone(),
        labels: data.corpus.schema.clone(),
        settings: cfg.to_kv().into_iter().collect(),
    };
    let hash = ckpt.save(path)?;
    record.output("checkpoint", path);
    record.checkpoint_hash = Some(hash);
    Ok(())
}

pub fn train(data: &DataArgs, config: &ConfigArgs, folds: Option<usize>, out: &Path) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    let (cfg, data) = resolve_config(config, data, &mut record)?;
    create_dir(out)?;
    record.manifest_path = Some(out.join("manifest.json"));

    if let Some(k) = folds {
        let corpus = load_corpus(&data.corpus, &LabelSchema::default())?;
        record.input("corpus", &data.corpus);
        let vocab = build_vocab(corpus.sentences(), cfg.min_count);
        let docs = corpus.documents(&vocab);
        let pretrained = match &data.embeddings {
            Some(p) => Some(load_pretrained_embeddings(p, &vocab, cfg.embedding_dim, cfg.seed)?.table),
            None => None,
        };
        let spec = ModelSpec {
            vocab: vocab.len(),
            sentiment_classes: corpus.schema.sentiment.len(),
            domain_classes: corpus.schema.domains.len(),
            pretrained,
        };
        let results = cross_validate(&spec, &docs, &cfg, k)?;
        let accs: Vec<f64> = results.iter().map(|r| r.test.sentiment_accuracy).collect();
        let mut lines: Vec<MetricLine> = results
            .iter()
            .map(|r| MetricLine::new("accuracy", format!("fold={}", r.fold), r.test.sentiment_accuracy))
            .collect();
        let (mean, std) = mean_std(&accs)?;
        lines.push(MetricLine::new("accuracy", "mean", mean));
        lines.push(MetricLine::new("accuracy", "std", std));
        let path = out.join("folds.tsv");
        write(&path, &machine_report(&lines))?;
        record.output("folds", &path);
        print!("{}", machine_report(&lines));
        return Ok(record);
    }

    let data = load_training_data(&data, &cfg, &mut record)?;
    let outcome = train_model(&data.spec, &data.train, &data.dev, &cfg)?;
    let mut log = format!("{METRICS_HEADER}\n");
    for r in &outcome.history {
        let _ = writeln!(log, "{}", r.log_line());
    }
    let metrics = out.join("metrics.tsv");
    write(&metrics, &log)?;
    record.output("metrics", &metrics);
    if outcome.non_monotone {
        warn!("training loss was not monotone after the warm-up epochs");
    }
    let dev = outcome.best_dev;
    save_checkpoint(&out.join("model.ckpt"), outcome.params, &cfg, &data, &mut record)?;
    let mut lines = vec![
        MetricLine::new("dev_accuracy", "sentiment", dev.sentiment_accuracy),
        MetricLine::new("best_epoch", "dev", outcome.best_epoch as f64),
    ];
    if let Some(d) = dev.domain_accuracy {
        lines.insert(1, MetricLine::new("dev_accuracy", "domain", d));
    }
    print!("{}", machine_report(&lines));
    Ok(record)
}

pub fn grid_search(data: &DataArgs, config: &ConfigArgs, out: &Path) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    let (cfg, data) = resolve_config(config, data, &mut record)?;
    create_dir(out)?;
    record.manifest_path = Some(out.join("manifest.json"));
    let data = load_training_data(&data, &cfg, &mut record)?;
    let result = run_grid(&data.spec, &data.train, &data.dev, &cfg)?;
    let mut table = String::from("learning_rate\tdropout\ttopic_vector_size\tseed\tdev_sentiment_acc\tdev_loss\tbest_epoch\tselected\n");
    for (i, c) in result.cells.iter().enumerate() {
        let _ = writeln!(
            table,
            "{}\t{}\t{}\t{}\t{:?}\t{:?}\t{}\t{}",
            c.config.learning_rate,
            c.config.dropout,
            c.config.hidden_size,
            c.config.seed,
            c.dev.sentiment_accuracy,
            c.dev.loss,
            c.best_epoch,
            u8::from(i == result.best)
        );
    }
    let grid_path = out.join("grid.tsv");
    write(&grid_path, &table)?;
    record.output("grid", &grid_path);
    let best = result.best_config().clone();
    let cfg_text: String = best.to_kv().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    let best_path = out.join("best.cfg");
    write(&best_path, &cfg_text)?;
    record.output("best_config", &best_path);
    let dev = result.cells[result.best].dev;
    save_checkpoint(&out.join("model.ckpt"), result.best_params, &best, &data, &mut record)?;
    let lines = vec![
        MetricLine::new("dev_accuracy", "best", dev.sentiment_accuracy),
        MetricLine::new("learning_rate", "best", best.learning_rate),
        MetricLine::new("dropout", "best", best.dropout),
        MetricLine::new("topic_vector_size", "best", best.hidden_size as f64),
    ];
    print!("{}", machine_report(&lines));
    Ok(record)
}

fn load_checkpoint(path: &Path, record: &mut RunRecord) -> Result<Checkpoint> {
    let (ckpt, hash) = Checkpoint::load(path)?;
    record.input("checkpoint", path);
    record.checkpoint_hash = Some(hash);
    Ok(ckpt)
}

/// Corpus mapped through the checkpoint's vocabulary and label schema.
fn checkpoint_docs(ckpt: &Checkpoint, corpus: &Path, record: &mut RunRecord) -> Result<(LoadedCorpus, Vec<Document>)> {
    let loaded = load_corpus(corpus, &ckpt.labels)?;
    record.input("corpus", corpus);
    let docs = loaded.documents(&ckpt.vocab);
    Ok((loaded, docs))
}

pub fn eval_accuracy(corpus: &Path, checkpoint: Option<&Path>, predictions: Option<&Path>, out: Option<&Path>) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    let mut lines = Vec::new();
    match (checkpoint, predictions) {
        (Some(cp), _) => {
            let ckpt = load_checkpoint(cp, &mut record)?;
            let (_, docs) = checkpoint_docs(&ckpt, corpus, &mut record)?;
            let registry = encoder_registry();
            let encoder = registry.get(&ckpt.encoder)?;
            let preds = predict(encoder, &ckpt.params, &docs, Objective::sentiment_only())?;
            let p: Vec<usize> = preds.iter().map(|p| p.sentiment).collect();
            let g: Vec<usize> = docs.iter().map(|d| d.sentiment).collect();
            lines.push(MetricLine::new("accuracy", "sentiment", accuracy(&p, &g)?));
            let labeled: Vec<(usize, usize)> = docs.iter().zip(&preds).filter_map(|(d, p)| d.domain.map(|g| (p.domain, g))).collect();
            if !labeled.is_empty() {
                let (p, g): (Vec<usize>, Vec<usize>) = labeled.into_iter().unzip();
                lines.push(MetricLine::new("accuracy", "domain", accuracy(&p, &g)?));
            }
        }
        (None, Some(pp)) => {
            let loaded = load_corpus(corpus, &LabelSchema::default())?;
            record.input("corpus", corpus);
            record.input("predictions", pp);
            let gold: HashMap<&str, usize> = loaded.records.iter().map(|r| (r.doc_id.as_str(), r.sentiment)).collect();
            let (mut p, mut g) = (Vec::new(), Vec::new());
            for (i, line) in read(pp)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let (id, label) = line
                    .split_once('\t')
                    .with_context(|| format!("predictions line {}: expected doc_id<TAB>label", i + 1))?;
                let gold_label = *gold
                    .get(id.trim())
                    .with_context(|| format!("predictions line {}: unknown document '{id}'", i + 1))?;
                p.push(loaded.schema.sentiment_index(label.trim())?);
                g.push(gold_label);
            }
            lines.push(MetricLine::new("accuracy", "sentiment", accuracy(&p, &g)?));
        }
        (None, None) => bail!("either --checkpoint or --predictions is required"),
    }
    emit(&lines, out, &mut record)?;
    Ok(record)
}

pub fn dump_embeddings(checkpoint: &Path, corpus: &Path, level: &str, out: &Path) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    let level: Level = level.parse()?;
    let dump = checkpoint_dump(checkpoint, corpus, level, &mut record)?;
    dump.save(out)?;
    info!("wrote {} {level}-level entries", dump.entries.len());
    record.output("dump", out);
    record.manifest_path = Some(beside(out));
    Ok(record)
}

fn checkpoint_dump(checkpoint: &Path, corpus: &Path, level: Level, record: &mut RunRecord) -> Result<LocalEmbeddingDump> {
    let ckpt = load_checkpoint(checkpoint, record)?;
    let (_, docs) = checkpoint_docs(&ckpt, corpus, record)?;
    let registry = encoder_registry();
    let encoder = registry.get(&ckpt.encoder)?;
    let hash = record.checkpoint_hash.clone().unwrap_or_default();
    Ok(collect_dump(encoder, &ckpt.params, &ckpt.vocab, &docs, level, &hash)?)
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    /// Embedding dump written by dump-embeddings.
    #[arg(long, conflicts_with_all = ["checkpoint"], required_unless_present = "checkpoint")]
    dump: Option<PathBuf>,
    /// Collect the dump from this checkpoint instead (needs --corpus).
    #[arg(long, requires = "corpus")]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "word")]
    level: String,
    /// Number of clusters.
    #[arg(long, conflicts_with = "tune_k", required_unless_present = "tune_k")]
    k: Option<usize>,
    /// Candidate cluster counts; the most coherent one is kept.
    #[arg(long, value_delimiter = ',')]
    tune_k: Option<Vec<usize>>,
    /// Reference corpus for coherence when tuning k (defaults to --corpus).
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Projection method: tsne or pca.
    #[arg(long, default_value = "tsne")]
    projection: String,
    #[arg(long, default_value_t = 30.0)]
    perplexity: f64,
    #[arg(long, default_value_t = 1000)]
    tsne_iterations: usize,
    /// Lower it for small point sets, which overshoot after early exaggeration.
    #[arg(long, default_value_t = 200.0)]
    tsne_learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Words reported per cluster.
    #[arg(long, default_value_t = 10)]
    top_m: usize,
    /// Cluster report output.
    #[arg(long)]
    out: PathBuf,
    /// Optional `member<TAB>x<TAB>y<TAB>cluster` file of projected points.
    #[arg(long)]
    points: Option<PathBuf>,
}

fn reference_tokens(path: &Path) -> Result<Vec<Vec<String>>> {
    let corpus = load_corpus(path, &LabelSchema::default())?;
    Ok(corpus.records.into_iter().map(|r| r.sentences.into_iter().flatten().collect()).collect())
}

pub fn cluster(args: &ClusterArgs) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    let level: Level = args.level.parse()?;
    let dump = match (&args.dump, &args.checkpoint, &args.corpus) {
        (Some(p), _, _) => {
            record.input("dump", p);
            let d = LocalEmbeddingDump::load(p)?;
            if d.level != level {
                bail!("dump holds {}-level entries but --level is {level}", d.level);
            }
            record.checkpoint_hash = Some(d.checkpoint_hash.clone());
            d
        }
        (None, Some(cp), Some(corpus)) => checkpoint_dump(cp, corpus, level, &mut record)?,
        _ => bail!("either --dump or --checkpoint with --corpus is required"),
    };
    let tsne = Tsne {
        perplexity: args.perplexity,
        iterations: args.tsne_iterations,
        learning_rate: args.tsne_learning_rate,
        ..Tsne::default()
    };
    let registry = projector_registry(tsne);
    let projector = registry.get(&args.projection)?;
    record.seed = Some(args.seed);
    for (k, v) in [
        ("projection", args.projection.clone()),
        ("perplexity", args.perplexity.to_string()),
        ("tsne_iterations", args.tsne_iterations.to_string()),
        ("tsne_learning_rate", args.tsne_learning_rate.to_string()),
        ("max_iter", args.max_iter.to_string()),
        ("top_m", args.top_m.to_string()),
        ("level", level.to_string()),
    ] {
        record.config.insert(k.to_string(), v);
    }
    info!("projecting {} entries with {}", dump.entries.len(), projector.name());
    let projected: Vec<Vec<f64>> = projector.project(&dump.vectors(), args.seed)?.into_iter().map(|p| p.to_vec()).collect();

    let report = if let Some(ks) = &args.tune_k {
        if level != Level::Word {
            bail!("--tune-k scores word lists and needs --level word");
        }
        let reference = args
            .reference
            .as_ref()
            .or(args.corpus.as_ref())
            .context("--tune-k needs --reference or --corpus for coherence statistics")?;
        record.input("reference", reference);
        record.config.insert("tune_k".into(), ks.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        let tokens = reference_tokens(reference)?;
        let coherence_cfg = CoherenceConfig {
            top_m: args.top_m.max(2),
            ..CoherenceConfig::default()
        };
        let mut best: Option<(f64, ClusterReport)> = None;
        let mut lines = Vec::new();
        for &k in ks {
            let km = kmeans(&projected, k, args.seed, args.max_iter)?;
            let report = ClusterReport::new(&km, &projected);
            let lists: Vec<Vec<String>> = rank_topics(&report, &dump, args.top_m)?
                .into_iter()
                .map(|l| l.into_iter().map(|(w, _)| w).collect())
                .collect();
            let score = topic_coherence(&lists, &tokens, &coherence_cfg)?.mean.unwrap_or(f64::NEG_INFINITY);
            lines.push(MetricLine::new("coherence", format!("k={k}"), score));
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, report));
            }
        }
        let (_, report) = best.context("--tune-k needs at least one value")?;
        lines.push(MetricLine::new("selected_k", "tune-k", report.k as f64));
        print!("{}", machine_report(&lines));
        report
    } else {
        let k = args.k.context("--k or --tune-k is required")?;
        record.config.insert("k".into(), k.to_string());
        let km = kmeans(&projected, k, args.seed, args.max_iter)?;
        let report = ClusterReport::new(&km, &projected);
        print!("{}", machine_report(&[MetricLine::new("inertia", format!("k={k}"), report.inertia)]));
        report
    };

    let text = match level {
        Level::Word => ranked_lines(&rank_topics(&report, &dump, args.top_m)?),
        Level::Sentence => member_lines(&report, &dump),
    };
    write(&args.out, &text)?;
    record.output("report", &args.out);
    record.manifest_path = Some(beside(&args.out));
    if let Some(p) = &args.points {
        let mut s = String::new();
        for ((e, pt), c) in dump.entries.iter().zip(&projected).zip(&report.assignments) {
            let _ = writeln!(s, "{}\t{:?}\t{:?}\t{c}", e.member, pt[0], pt[1]);
        }
        write(p, &s)?;
        record.output("points", p);
    }
    Ok(record)
}

/// Word lists from a cluster report (grouped by cluster id, in rank order)
/// or from plain whitespace-separated lines.
fn read_topics(text: &str) -> Result<Vec<Vec<String>>> {
    let rows: Vec<Vec<&str>> = text.lines().filter(|l| !l.trim().is_empty()).map(|l| l.split('\t').collect()).collect();
    if !rows.is_empty() && rows.iter().all(|r| r.len() == 4) {
        let mut grouped: BTreeMap<usize, Vec<(usize, String)>> = BTreeMap::new();
        for r in rows {
            let c: usize = r[0].parse().with_context(|| format!("bad cluster id '{}'", r[0]))?;
            let rank: usize = r[1].parse().with_context(|| format!("bad rank '{}'", r[1]))?;
            grouped.entry(c).or_default().push((rank, r[2].to_string()));
        }
        return Ok(grouped
            .into_values()
            .map(|mut v| {
                v.sort();
                v.into_iter().map(|(_, w)| w).collect()
            })
            .collect());
    }
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect())
}

pub fn coherence(topics: &Path, reference: &Path, window: usize, top_m: usize, out: Option<&Path>) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    record.input("topics", topics);
    record.input("reference", reference);
    record.config.insert("window".into(), window.to_string());
    record.config.insert("top_m".into(), top_m.to_string());
    let lists = read_topics(&read(topics)?)?;
    let tokens = reference_tokens(reference)?;
    let cfg = CoherenceConfig {
        window,
        top_m,
        ..CoherenceConfig::default()
    };
    let report = topic_coherence(&lists, &tokens, &cfg)?;
    let mut lines: Vec<MetricLine> = report
        .topics
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.score.map(|s| MetricLine::new("coherence", format!("topic={i}"), s)))
        .collect();
    if let Some(m) = report.mean {
        lines.push(MetricLine::new("coherence", "mean", m));
    }
    lines.push(MetricLine::new("undefined_topics", "count", report.undefined_topics as f64));
    let skipped: usize = report.topics.iter().map(|t| t.pairs_skipped).sum();
    lines.push(MetricLine::new("skipped_pairs", "count", skipped as f64));
    emit(&lines, out, &mut record)?;
    Ok(record)
}

pub fn aspect_coherence(clusters: &Path, corpus: &Path, thresholds: Vec<f64>, out: Option<&Path>) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    record.input("clusters", clusters);
    record.input("corpus", corpus);
    let loaded = load_corpus(corpus, &LabelSchema::default())?;
    let mut gold = HashMap::new();
    for r in &loaded.records {
        for a in &r.annotations {
            gold.insert(
                sentence_id(&r.doc_id, a.sentence),
                AspectLabel {
                    aspect: a.aspect.clone(),
                    polarity: a.polarity.clone(),
                },
            );
        }
    }
    // member ids only; the report carries no labels
    let groups = read_topics(&read(clusters)?)?;
    let eval = AspectClusterEval {
        clusters: groups,
        gold,
        thresholds,
    };
    let result = aspect_polarity_coherence(&eval)?;
    let mut lines = Vec::new();
    for r in &result.ratios {
        lines.push(MetricLine::new("aspect_ratio", format!("x={}", r.threshold), r.aspect));
        lines.push(MetricLine::new("aspect_polarity_ratio", format!("x={}", r.threshold), r.aspect_polarity));
    }
    lines.push(MetricLine::new("clusters", "counted", result.clusters_counted as f64));
    eprint!("{}", table_report(&lines));
    emit(&lines, out, &mut record)?;
    Ok(record)
}

fn joined(v: Option<&Vec<f64>>) -> String {
    match v {
        Some(v) if !v.is_empty() => v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
        _ => "-".into(),
    }
}

pub fn export_attention(checkpoint: &Path, corpus: &Path, out: &Path) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    let ckpt = load_checkpoint(checkpoint, &mut record)?;
    let (_, docs) = checkpoint_docs(&ckpt, corpus, &mut record)?;
    let registry = encoder_registry();
    let encoder = registry.get(&ckpt.encoder)?;
    let mut s = String::from("doc_id\tlevel\tsentence\tposition\tmember\tbeta\talpha\n");
    for doc in &docs {
        let enc = encode_values(encoder, &ckpt.params, &doc.sentences, ForwardMode::inference())?;
        for (si, ids) in doc.sentences.iter().enumerate() {
            let _ = writeln!(
                s,
                "{}\tsentence\t{si}\t{si}\t{}\t{:?}\t{}",
                doc.doc_id,
                sentence_id(&doc.doc_id, si),
                enc.sentence_betas[si],
                joined(enc.sentence_alphas.get(si))
            );
            for (p, &id) in ids.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{}\tword\t{si}\t{p}\t{}\t{:?}\t{}",
                    doc.doc_id,
                    ckpt.vocab.token(id),
                    enc.word_betas[si][p],
                    joined(enc.word_alphas.get(si).and_then(|a| a.get(p)))
                );
            }
        }
    }
    write(out, &s)?;
    record.output("attention", out);
    record.manifest_path = Some(beside(out));
    Ok(record)
}

pub fn synth_corpus(out: &Path, docs: usize, seed: u64, domains: usize, separable: bool, annotate: bool) -> Result<RunRecord> {
    let mut record = RunRecord::default();
    let base = if separable {
        synthetic::SyntheticConfig::separable(docs, seed)
    } else {
        synthetic::SyntheticConfig {
            docs,
            seed,
            ..Default::default()
        }
    };
    let cfg = synthetic::SyntheticConfig { domains, annotate, ..base };
    let records = synthetic::generate(&cfg);
    synthetic::write_corpus(out, &records)?;
    record.seed = Some(seed);
    for (k, v) in [
        ("docs", docs.to_string()),
        ("domains", domains.to_string()),
        ("separable", separable.to_string()),
        ("annotate", annotate.to_string()),
    ] {
        record.config.insert(k.to_string(), v);
    }
    record.output("corpus", out);
    record.manifest_path = Some(beside(out));
    Ok(record)
}
