//! Synthetic review corpora with controllable sentiment and domain signal.
//!
//! Every domain owns a set of aspect nouns (`d{domain}a{aspect}n{k}`). Opinion
//! sentences carry either a context-free polarity word (`good{k}` / `bad{k}`)
//! or a context-dependent one (`ctx{k}`) whose polarity flips between even
//! and odd domains, so reading it correctly requires knowing the topic.
//! Records are emitted as corpus-file lines so they travel through the same
//! loader as real data.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TdamError};

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub docs: usize,
    pub domains: usize,
    pub aspects_per_domain: usize,
    pub nouns_per_aspect: usize,
    pub sentences: (usize, usize),
    pub fillers_per_sentence: (usize, usize),
    /// Probability that an opinion sentence of a polar document agrees with the document label.
    pub polarity_consistency: f64,
    /// Share of opinion words drawn from the context-dependent set.
    pub contextual_rate: f64,
    /// Probability that a sentence's aspect noun comes from another domain.
    pub off_domain_rate: f64,
    /// Probability of replacing the sentiment label by a random one.
    pub label_noise: f64,
    /// Emit the per-sentence aspect/polarity annotation field.
    pub annotate: bool,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            docs: 100,
            domains: 5,
            aspects_per_domain: 3,
            nouns_per_aspect: 3,
            sentences: (2, 5),
            fillers_per_sentence: (2, 5),
            polarity_consistency: 0.85,
            contextual_rate: 0.5,
            off_domain_rate: 0.1,
            label_noise: 0.0,
            annotate: false,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    /// Noise-free corpus in which sentiment and domain are separable.
    pub fn separable(docs: usize, seed: u64) -> Self {
        Self {
            docs,
            sentences: (1, 3),
            fillers_per_sentence: (1, 3),
            polarity_consistency: 1.0,
            contextual_rate: 0.0,
            off_domain_rate: 0.0,
            seed,
            ..Self::default()
        }
    }
}

pub const SENTIMENTS: [&str; 3] = ["negative", "neutral", "positive"];
const POLAR_WORDS: usize = 4;
const CONTEXT_WORDS: usize = 4;
const FILLERS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecord {
    pub doc_id: String,
    pub sentiment: String,
    pub domain: String,
    pub text: String,
    pub annotations: Option<String>,
}

impl SyntheticRecord {
    pub fn to_line(&self) -> String {
        let mut line = format!("{}\t{}\t{}\t{}", self.doc_id, self.sentiment, self.domain, self.text);
        if let Some(a) = &self.annotations {
            line.push('\t');
            line.push_str(a);
        }
        line
    }
}

fn domain_name(d: usize) -> String {
    format!("domain{d}")
}

/// Generates a corpus; documents cycle through (sentiment, domain) pairs so
/// every combination is balanced.
pub fn generate(cfg: &SyntheticConfig) -> Vec<SyntheticRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.docs);
    for i in 0..cfg.docs {
        let sentiment = i % 3;
        let domain = (i / 3) % cfg.domains.max(1);
        let n_sent = rng.random_range(cfg.sentences.0..=cfg.sentences.1.max(cfg.sentences.0));
        let mut sentences = Vec::with_capacity(n_sent);
        let mut annotations = Vec::with_capacity(n_sent);
        for s in 0..n_sent {
            let noun_domain = if cfg.domains > 1 && rng.random::<f64>() < cfg.off_domain_rate {
                (domain + rng.random_range(1..cfg.domains)) % cfg.domains
            } else {
                domain
            };
            let aspect = rng.random_range(0..cfg.aspects_per_domain.max(1));
            let noun = rng.random_range(0..cfg.nouns_per_aspect.max(1));
            // polarity: 0 negative, 1 neutral, 2 positive
            let polarity = match sentiment {
                1 => {
                    if rng.random::<f64>() < 0.5 {
                        1
                    } else if rng.random::<bool>() {
                        0
                    } else {
                        2
                    }
                }
                p => {
                    if rng.random::<f64>() < cfg.polarity_consistency {
                        p
                    } else if rng.random::<bool>() {
                        1
                    } else {
                        2 - p
                    }
                }
            };
            let mut words: Vec<String> = Vec::new();
            let fillers = rng.random_range(cfg.fillers_per_sentence.0..=cfg.fillers_per_sentence.1.max(cfg.fillers_per_sentence.0));
            for _ in 0..fillers {
                words.push(format!("w{}", rng.random_range(0..FILLERS)));
            }
            let noun_word = format!("d{noun_domain}a{aspect}n{noun}");
            words.insert(rng.random_range(0..=words.len()), noun_word);
            if polarity != 1 {
                let positive = polarity == 2;
                let opinion = if rng.random::<f64>() < cfg.contextual_rate {
                    // context words read positive in even domains and negative in odd ones
                    let base = if domain.is_multiple_of(2) == positive { 0 } else { CONTEXT_WORDS / 2 };
                    format!("ctx{}", base + rng.random_range(0..CONTEXT_WORDS / 2))
                } else if positive {
                    format!("good{}", rng.random_range(0..POLAR_WORDS))
                } else {
                    format!("bad{}", rng.random_range(0..POLAR_WORDS))
                };
                words.insert(rng.random_range(0..=words.len()), opinion);
            }
            let mut sentence = words.join(" ");
            sentence.push_str(" .");
            sentences.push(sentence);
            annotations.push(format!("{s}:D{noun_domain}#A{aspect}:{}", SENTIMENTS[polarity]));
        }
        let label = if rng.random::<f64>() < cfg.label_noise {
            rng.random_range(0..3)
        } else {
            sentiment
        };
        out.push(SyntheticRecord {
            doc_id: format!("doc{i:05}"),
            sentiment: SENTIMENTS[label].to_string(),
            domain: domain_name(domain),
            text: sentences.join(" "),
            annotations: cfg.annotate.then(|| annotations.join(";")),
        });
    }
    out
}

pub fn to_corpus_text(records: &[SyntheticRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(s, "{}", r.to_line());
    }
    s
}

pub fn write_corpus(path: &Path, records: &[SyntheticRecord]) -> Result<()> {
    std::fs::write(path, to_corpus_text(records)).map_err(|e| TdamError::io(path, e))
}
