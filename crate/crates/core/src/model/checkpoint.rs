//! Versioned plain-text checkpoint container.
//!
//! ```text
//! tdam-checkpoint 1
//! encoder tdam
//! dims hidden=6 topics=2 embedding=4 vocab=10 sentiment_classes=3 domain_classes=5
//! setting learning_rate 0.01
//! label sentiment negative
//! label domain restaurants
//! vocab 10
//! <one token per line>
//! param word.forward.w_r 3,4
//! <space-separated values>
//! end
//! ```
//!
//! Values are written in shortest round-trip exponent form, so a save/load
//! cycle reproduces every parameter bit-for-bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::params::{ModelDims, TdamParams};
use crate::corpus::{LabelSchema, Vocabulary};
use crate::error::{Result, TdamError};
use crate::numerics::Tensor;

pub const CHECKPOINT_MAGIC: &str = "tdam-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: TdamParams,
    pub encoder: String,
    pub vocab: Vocabulary,
    pub labels: LabelSchema,
    /// Free-form settings (the resolved training configuration).
    pub settings: BTreeMap<String, String>,
}

fn err(msg: impl Into<String>) -> TdamError {
    TdamError::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let d = &self.params.dims;
        let mut s = String::new();
        let _ = writeln!(s, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}");
        let _ = writeln!(s, "encoder {}", self.encoder);
        let _ = writeln!(
            s,
            "dims hidden={} topics={} embedding={} vocab={} sentiment_classes={} domain_classes={}",
            d.hidden, d.topics, d.embedding, d.vocab, d.sentiment_classes, d.domain_classes
        );
        for (k, v) in &self.settings {
            let _ = writeln!(s, "setting {k} {v}");
        }
        for l in &self.labels.sentiment {
            let _ = writeln!(s, "label sentiment {l}");
        }
        for l in &self.labels.domains {
            let _ = writeln!(s, "label domain {l}");
        }
        let _ = writeln!(s, "vocab {}", self.vocab.len());
        for t in self.vocab.tokens() {
            let _ = writeln!(s, "{t}");
        }
        for (name, t) in self.params.named() {
            let shape: Vec<String> = t.shape().iter().map(usize::to_string).collect();
            let _ = writeln!(s, "param {name} {}", shape.join(","));
            let vals: Vec<String> = t.data().iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "{}", vals.join(" "));
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err("empty file"))?;
        let version = header
            .strip_prefix(CHECKPOINT_MAGIC)
            .map(str::trim)
            .ok_or_else(|| err("missing checkpoint header"))?;
        if version != CHECKPOINT_VERSION.to_string() {
            return Err(err(format!("unsupported version {version}")));
        }
        let mut encoder = None;
        let mut dims = None;
        let mut settings = BTreeMap::new();
        let mut labels = LabelSchema {
            sentiment: Vec::new(),
            domains: Vec::new(),
        };
        let mut vocab = None;
        let mut tensors: BTreeMap<String, Tensor> = BTreeMap::new();
        let mut finished = false;
        while let Some(line) = lines.next() {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "encoder" => encoder = Some(rest.trim().to_string()),
                "dims" => dims = Some(parse_dims(rest)?),
                "setting" => {
                    let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                    settings.insert(k.to_string(), v.to_string());
                }
                "label" => match rest.split_once(' ') {
                    Some(("sentiment", l)) => labels.sentiment.push(l.to_string()),
                    Some(("domain", l)) => labels.domains.push(l.to_string()),
                    _ => return Err(err(format!("bad label line '{line}'"))),
                },
                "vocab" => {
                    let n: usize = rest.trim().parse().map_err(|_| err("bad vocab count"))?;
                    let mut tokens = Vec::with_capacity(n);
                    for _ in 0..n {
                        tokens.push(lines.next().ok_or_else(|| err("truncated vocabulary"))?.to_string());
                    }
                    vocab = Some(Vocabulary::from_tokens(tokens));
                }
                "param" => {
                    let (name, shape) = rest.split_once(' ').ok_or_else(|| err(format!("bad param line '{line}'")))?;
                    let shape: Vec<usize> = shape
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|_| err(format!("bad shape for {name}"))))
                        .collect::<Result<_>>()?;
                    let values_line = lines.next().ok_or_else(|| err(format!("missing values for {name}")))?;
                    let data: Vec<f64> = values_line
                        .split_whitespace()
                        .map(|v| v.parse().map_err(|_| err(format!("bad value '{v}' in {name}"))))
                        .collect::<Result<_>>()?;
                    let t = Tensor::new(shape, data).map_err(|e| err(format!("{name}: {e}")))?;
                    tensors.insert(name.to_string(), t);
                }
                "end" => {
                    finished = true;
                    break;
                }
                "" => {}
                other => return Err(err(format!("unknown record '{other}'"))),
            }
        }
        if !finished {
            return Err(err("truncated file (no end marker)"));
        }
        let dims = dims.ok_or_else(|| err("missing dims"))?;
        let vocab = vocab.ok_or_else(|| err("missing vocabulary"))?;
        if vocab.len() != dims.vocab {
            return Err(err(format!(
                "vocabulary has {} entries but dims declare {}",
                vocab.len(),
                dims.vocab
            )));
        }
        let mut params = TdamParams::zeros(dims)?;
        let expected: Vec<String> = params.named().into_iter().map(|(n, _)| n).collect();
        for name in &expected {
            let loaded = tensors.remove(name).ok_or_else(|| err(format!("missing parameter {name}")))?;
            let slot = params.get_mut(name).expect("name from params");
            if loaded.shape() != slot.shape() {
                return Err(err(format!(
                    "parameter {name} has shape {:?}, expected {:?}",
                    loaded.shape(),
                    slot.shape()
                )));
            }
            *slot = loaded;
        }
        if let Some(extra) = tensors.keys().next() {
            return Err(err(format!("unexpected parameter {extra}")));
        }
        params.validate()?;
        Ok(Self {
            params,
            encoder: encoder.ok_or_else(|| err("missing encoder"))?,
            vocab,
            labels,
            settings,
        })
    }

    pub fn save(&self, path: &Path) -> Result<String> {
        let text = self.to_text();
        std::fs::write(path, &text).map_err(|e| TdamError::io(path, e))?;
        Ok(content_hash(text.as_bytes()))
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let bytes = std::fs::read(path).map_err(|e| TdamError::io(path, e))?;
        let text = String::from_utf8(bytes).map_err(|_| err("file is not UTF-8"))?;
        Ok((Self::from_text(&text)?, content_hash(text.as_bytes())))
    }
}

fn parse_dims(rest: &str) -> Result<ModelDims> {
    let mut map = BTreeMap::new();
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| err(format!("bad dims entry '{kv}'")))?;
        let v: usize = v.parse().map_err(|_| err(format!("bad dims value '{kv}'")))?;
        map.insert(k, v);
    }
    let get = |k: &str| map.get(k).copied().ok_or_else(|| err(format!("dims missing {k}")));
    Ok(ModelDims {
        hidden: get("hidden")?,
        topics: get("topics")?,
        embedding: get("embedding")?,
        vocab: get("vocab")?,
        sentiment_classes: get("sentiment_classes")?,
        domain_classes: get("domain_classes")?,
    })
}

/// Hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
