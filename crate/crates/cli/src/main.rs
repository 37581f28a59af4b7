mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use manifest::{RunManifest, RunRecord};

#[derive(Parser, Debug)]
#[command(name = "tdam", version, about = "Topic-dependent attention model: training, topic extraction and evaluation")]
struct Cli {
    /// Worker threads for data-parallel work.
    #[arg(long, global = true, env = "TDAM_THREADS")]
    threads: Option<usize>,

    /// Manifest output path (defaults to a file next to the main output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// `key=value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Configuration override, repeatable; applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// Encoder variant: tdam, han or bigru.
    #[arg(long)]
    encoder: Option<String>,

    /// Train the domain head jointly.
    #[arg(long)]
    multitask: bool,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Training corpus; may instead be given as `corpus=` in the config file.
    #[arg(long)]
    corpus: Option<PathBuf>,

    /// Development corpus; without it a seeded tenth of the corpus is held out.
    #[arg(long)]
    dev: Option<PathBuf>,

    /// Pretrained word vectors in text form.
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model, or cross-validate with --folds.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Cross-validation folds; no checkpoint is written.
        #[arg(long)]
        folds: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model per grid cell and keep the best on dev.
    GridSearch {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sentiment (and domain) accuracy of a checkpoint or a prediction file.
    EvalAccuracy {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, required_unless_present = "predictions", conflicts_with = "predictions")]
        checkpoint: Option<PathBuf>,
        /// `doc_id<TAB>sentiment_label` lines.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write per-occurrence local topic embeddings.
    DumpEmbeddings {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "word")]
        level: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project, cluster and rank local topic embeddings.
    Cluster(commands::ClusterArgs),
    /// Windowed NPMI coherence of topic word lists.
    Coherence {
        /// Cluster report or one whitespace-separated word list per line.
        #[arg(long)]
        topics: PathBuf,
        /// Reference corpus for co-occurrence counts.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long, default_value_t = 10)]
        top_m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aspect and aspect-polarity purity of sentence clusters.
    AspectCoherence {
        /// Sentence-level cluster report.
        #[arg(long)]
        clusters: PathBuf,
        /// Corpus with sentence annotations.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = tdam::evaluation::DEFAULT_THRESHOLDS)]
        thresholds: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export per-word and per-sentence attention weights.
    ExportAttention {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic review corpus.
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        docs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        domains: usize,
        /// Noise-free sentiment and domain signal.
        #[arg(long)]
        separable: bool,
        /// Emit sentence aspect/polarity annotations.
        #[arg(long)]
        annotate: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Train { .. } => "train",
            Command::GridSearch { .. } => "grid-search",
            Command::EvalAccuracy { .. } => "eval-accuracy",
            Command::DumpEmbeddings { .. } => "dump-embeddings",
            Command::Cluster(_) => "cluster",
            Command::Coherence { .. } => "coherence",
            Command::AspectCoherence { .. } => "aspect-coherence",
            Command::ExportAttention { .. } => "export-attention",
            Command::SynthCorpus { .. } => "synth-corpus",
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<RunRecord> {
    match command {
        Command::Train { data, config, folds, out } => commands::train(&data, &config, folds, &out),
        Command::GridSearch { data, config, out } => commands::grid_search(&data, &config, &out),
        Command::EvalAccuracy {
            corpus,
            checkpoint,
            predictions,
            out,
        } => commands::eval_accuracy(&corpus, checkpoint.as_deref(), predictions.as_deref(), out.as_deref()),
        Command::DumpEmbeddings {
            checkpoint,
            corpus,
            level,
            out,
        } => commands::dump_embeddings(&checkpoint, &corpus, &level, &out),
        Command::Cluster(args) => commands::cluster(&args),
        Command::Coherence {
            topics,
            reference,
            window,
            top_m,
            out,
        } => commands::coherence(&topics, &reference, window, top_m, out.as_deref()),
        Command::AspectCoherence {
            clusters,
            corpus,
            thresholds,
            out,
        } => commands::aspect_coherence(&clusters, &corpus, thresholds, out.as_deref()),
        Command::ExportAttention { checkpoint, corpus, out } => commands::export_attention(&checkpoint, &corpus, &out),
        Command::SynthCorpus {
            out,
            docs,
            seed,
            domains,
            separable,
            annotate,
        } => commands::synth_corpus(&out, docs, seed, domains, separable, annotate),
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(t) = e.downcast_ref::<tdam::TdamError>() {
        return t.kind();
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return "io";
    }
    "error"
}

/// Context chain joined by ": ", dropping causes already quoted by their parent.
fn chain_text(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let one_line = message.replace(['\n', '\t'], " ");
    eprintln!("error\t{kind}\t{one_line}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail("usage", first);
        }
    };

    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail("threads", &e.to_string());
        }
    }

    let started = Instant::now();
    let started_unix = manifest::unix_now();
    let name = cli.command.name();
    let record = match dispatch(cli.command) {
        Ok(r) => r,
        Err(e) => return fail(error_kind(&e), &chain_text(&e)),
    };

    let path = cli
        .manifest
        .or_else(|| record.manifest_path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("tdam-{name}.manifest.json")));
    let m = RunManifest {
        command: name.to_string(),
        argv: std::env::args().collect(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: record.config,
        seed: record.seed,
        threads: rayon::current_num_threads(),
        inputs: record.inputs,
        outputs: record.outputs,
        checkpoint_hash: record.checkpoint_hash,
        started_unix,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    if let Err(e) = manifest::write(&m, &path) {
        return fail("io", &format!("{e:#}"));
    }
    ExitCode::SUCCESS
}
