//! Per-occurrence local topic embeddings collected from a trained model.
//!
//! File format:
//!
//! ```text
//! tdam-dump 1
//! level word
//! dim 8
//! checkpoint <sha256>
//! entries 7
//! <member>\t<doc_id>\t<sentence>\t<position>\t<v1 v2 ... vn>
//! ```

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Document, Vocabulary};
use crate::error::{Result, TdamError};
use crate::model::{encode_values, DocumentEncoder, ForwardMode, TdamParams};

pub const DUMP_MAGIC: &str = "tdam-dump";
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Word,
    Sentence,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Word => "word",
            Level::Sentence => "sentence",
        })
    }
}

impl FromStr for Level {
    type Err = TdamError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Level::Word),
            "sentence" => Ok(Level::Sentence),
            _ => Err(TdamError::invalid(format!("unknown level '{s}', expected word or sentence"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpEntry {
    /// Word token, or sentence id `doc_id#index` at sentence level.
    pub member: String,
    pub doc_id: String,
    pub sentence: usize,
    /// Word position within the sentence; 0 at sentence level.
    pub position: usize,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalEmbeddingDump {
    pub level: Level,
    pub dim: usize,
    pub checkpoint_hash: String,
    pub entries: Vec<DumpEntry>,
}

pub fn sentence_id(doc_id: &str, index: usize) -> String {
    format!("{doc_id}#{index}")
}

/// Runs the encoder in inference mode over `docs` and records one vector per
/// word occurrence or per sentence. Topical encoders yield the local topic
/// embeddings; the others fall back to their hidden states.
pub fn collect_dump(
    encoder: &dyn DocumentEncoder,
    params: &TdamParams,
    vocab: &Vocabulary,
    docs: &[Document],
    level: Level,
    checkpoint_hash: &str,
) -> Result<LocalEmbeddingDump> {
    if vocab.len() != params.dims.vocab {
        return Err(TdamError::invalid(format!(
            "vocabulary has {} entries but the model expects {}",
            vocab.len(),
            params.dims.vocab
        )));
    }
    let topical = encoder.topical();
    let per_doc = docs
        .par_iter()
        .map(|doc| {
            let enc = encode_values(encoder, params, &doc.sentences, ForwardMode::inference())?;
            let mut out = Vec::new();
            match level {
                Level::Word => {
                    let vectors = if topical { &enc.word_q } else { &enc.word_hidden };
                    for (s, (ids, vs)) in doc.sentences.iter().zip(vectors).enumerate() {
                        for (p, (&id, v)) in ids.iter().zip(vs).enumerate() {
                            out.push(DumpEntry {
                                member: vocab.token(id).to_string(),
                                doc_id: doc.doc_id.clone(),
                                sentence: s,
                                position: p,
                                vector: v.clone(),
                            });
                        }
                    }
                }
                Level::Sentence => {
                    let vectors = if topical { &enc.sentence_q } else { &enc.sentence_hidden };
                    for (s, v) in vectors.iter().enumerate() {
                        out.push(DumpEntry {
                            member: sentence_id(&doc.doc_id, s),
                            doc_id: doc.doc_id.clone(),
                            sentence: s,
                            position: 0,
                            vector: v.clone(),
                        });
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalEmbeddingDump {
        level,
        dim: params.dims.hidden,
        checkpoint_hash: checkpoint_hash.to_string(),
        entries: per_doc.into_iter().flatten().collect(),
    })
}

fn perr(line: usize, message: impl Into<String>) -> TdamError {
    TdamError::Parse {
        location: format!("dump line {line}"),
        message: message.into(),
    }
}

impl LocalEmbeddingDump {
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.vector.clone()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{DUMP_MAGIC} {DUMP_VERSION}\nlevel {}\ndim {}\ncheckpoint {}\nentries {}\n",
            self.level,
            self.dim,
            self.checkpoint_hash,
            self.entries.len()
        );
        for e in &self.entries {
            let v: Vec<String> = e.vector.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", e.member, e.doc_id, e.sentence, e.position, v.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |key: &str| -> Result<String> {
            let (n, line) = lines.next().ok_or_else(|| perr(0, "truncated header"))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| perr(n, format!("expected '{key}'")))
        };
        let version = header(DUMP_MAGIC)?;
        if version != DUMP_VERSION.to_string() {
            return Err(perr(1, format!("unsupported dump version {version}")));
        }
        let level: Level = header("level")?.parse()?;
        let dim: usize = header("dim")?.parse().map_err(|_| perr(3, "bad dim"))?;
        let checkpoint_hash = header("checkpoint")?;
        let count: usize = header("entries")?.parse().map_err(|_| perr(5, "bad entry count"))?;
        let mut entries = Vec::with_capacity(count);
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let [member, doc_id, sentence, position, values] = f.as_slice() else {
                return Err(perr(n, "expected 5 tab-separated fields"));
            };
            let vector: Vec<f64> = values
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| perr(n, format!("bad value '{v}'"))))
                .collect::<Result<_>>()?;
            if vector.len() != dim {
                return Err(perr(n, format!("vector has {} values, expected {dim}", vector.len())));
            }
            entries.push(DumpEntry {
                member: member.to_string(),
                doc_id: doc_id.to_string(),
                sentence: sentence.parse().map_err(|_| perr(n, "bad sentence index"))?,
                position: position.parse().map_err(|_| perr(n, "bad position"))?,
                vector,
            });
        }
        if entries.len() != count {
            return Err(perr(0, format!("header declares {count} entries, found {}", entries.len())));
        }
        Ok(Self {
            level,
            dim,
            checkpoint_hash,
            entries,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| TdamError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TdamError::io(path, e))?;
        Self::from_text(&text)
    }
}
