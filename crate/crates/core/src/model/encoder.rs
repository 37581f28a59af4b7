//! Hierarchical document encoders built on the topical GRU.
//!
//! A sequence of inputs is read by two topical GRU passes. Each direction
//! keeps a running local topic embedding computed from its own half-state:
//! the half-state is placed in its slot of an otherwise zero `n`-vector and
//! read through the level's `n×n` topic projection, so the recurrence stays
//! causal while sharing the projection used on the full bidirectional state.
//! The exported per-position topic read (`alpha`, `q`) is recomputed from the
//! concatenated bidirectional state.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cell::{topic_attention, topical_gru_step, TopicRead};
use super::params::{Head, Level, Network, TdamParams};
use crate::error::{Result, TdamError};
use crate::numerics::{Tape, Tensor, Var};
use crate::registry::Registry;

/// How a forward pass is run.
#[derive(Debug, Clone, Copy)]
pub struct ForwardMode {
    /// Enables dropout.
    pub training: bool,
    pub dropout: f64,
    /// Seed of the dropout mask stream.
    pub seed: u64,
    /// Records the bidirectional topic reads used for extraction and export.
    pub diagnostics: bool,
    /// Binds parameters as differentiable leaves.
    pub differentiable: bool,
}

impl ForwardMode {
    pub fn inference() -> Self {
        Self {
            training: false,
            dropout: 0.0,
            seed: 0,
            diagnostics: true,
            differentiable: false,
        }
    }

    pub fn training(dropout: f64, seed: u64) -> Self {
        Self {
            training: true,
            dropout,
            seed,
            diagnostics: false,
            differentiable: true,
        }
    }
}

/// A tape with the model parameters bound to it.
pub struct ForwardCtx<'p> {
    pub tape: Tape,
    pub params: &'p TdamParams,
    pub net: Network<Var>,
    embed_rows: BTreeMap<usize, Var>,
    mode: ForwardMode,
    rng: ChaCha8Rng,
    half_ones: Var,
    half_zeros: Var,
    full_zeros: Var,
}

impl<'p> ForwardCtx<'p> {
    pub fn new(params: &'p TdamParams, mode: ForwardMode) -> Self {
        let mut tape = Tape::new();
        let net = params
            .net
            .try_map::<Var, TdamError>("", &mut |_, t| {
                Ok(if mode.differentiable {
                    tape.param(t.clone())
                } else {
                    tape.constant(t.clone())
                })
            })
            .expect("binding is infallible");
        let half = params.dims.half();
        let half_ones = tape.constant(Tensor::filled(&[half], 1.0));
        let half_zeros = tape.constant(Tensor::zeros(&[half]));
        let full_zeros = tape.constant(Tensor::zeros(&[params.dims.hidden]));
        Self {
            tape,
            params,
            net,
            embed_rows: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(mode.seed),
            mode,
            half_ones,
            half_zeros,
            full_zeros,
        }
    }

    pub fn mode(&self) -> ForwardMode {
        self.mode
    }

    /// Embedding row of `id` bound as a leaf (shared across occurrences).
    pub fn embed(&mut self, id: usize) -> Result<Var> {
        let vocab = self.params.dims.vocab;
        if id >= vocab {
            return Err(TdamError::UnknownWord { id, size: vocab });
        }
        if let Some(v) = self.embed_rows.get(&id) {
            return Ok(*v);
        }
        let row = Tensor::vector(self.params.embeddings.row(id).to_vec());
        let v = if self.mode.differentiable {
            self.tape.param(row)
        } else {
            self.tape.constant(row)
        };
        self.embed_rows.insert(id, v);
        Ok(v)
    }

    /// Embedding-row leaves bound so far, by word id.
    pub fn embedding_rows(&self) -> &BTreeMap<usize, Var> {
        &self.embed_rows
    }

    /// Inverted dropout; identity outside training or at rate zero.
    pub fn dropout(&mut self, v: Var) -> Result<Var> {
        let p = self.mode.dropout;
        if !self.mode.training || p <= 0.0 {
            return Ok(v);
        }
        let len = self.tape.value(v).len();
        let keep = 1.0 / (1.0 - p);
        let mask: Vec<f64> = (0..len)
            .map(|_| if self.rng.random::<f64>() < p { 0.0 } else { keep })
            .collect();
        let m = self.tape.constant(Tensor::vector(mask));
        self.tape.mul(v, m)
    }
}

/// Tape handles for one encoded sentence (or, at the top level, document).
#[derive(Debug, Clone)]
pub struct SequenceVars {
    /// Bidirectional hidden state per position.
    pub hidden: Vec<Var>,
    /// Final-attention weights over positions.
    pub beta: Var,
    /// Attention-pooled representation.
    pub pooled: Var,
    /// Bidirectional topic reads per position (present with diagnostics on a topical encoder).
    pub topic_reads: Vec<TopicRead>,
}

#[derive(Debug, Clone)]
pub struct DocumentVars {
    pub sentences: Vec<SequenceVars>,
    /// Sentence-level pass; `pooled` is the document representation `m_d`.
    pub document: SequenceVars,
}

impl DocumentVars {
    pub fn doc_rep(&self) -> Var {
        self.document.pooled
    }
}

/// Runs both directions of a (topical) bidirectional GRU over `inputs`.
fn bidirectional(ctx: &mut ForwardCtx, level: &Level<Var>, inputs: &[Var], topical: bool) -> Result<Vec<Var>> {
    let steps = inputs.len();
    let mut fwd = Vec::with_capacity(steps);
    let mut bwd = vec![ctx.half_zeros; steps];
    for (dir, gru) in [(0usize, &level.forward), (1, &level.backward)] {
        let mut h = ctx.half_zeros;
        let mut q = topical.then_some(ctx.full_zeros);
        let order: Vec<usize> = if dir == 0 {
            (0..steps).collect()
        } else {
            (0..steps).rev().collect()
        };
        for (i, &t) in order.iter().enumerate() {
            h = topical_gru_step(&mut ctx.tape, gru, inputs[t], h, q, ctx.half_ones)?;
            if dir == 0 {
                fwd.push(h);
            } else {
                bwd[t] = h;
            }
            if topical && i + 1 < steps {
                let padded = if dir == 0 {
                    ctx.tape.concat(&[h, ctx.half_zeros])?
                } else {
                    ctx.tape.concat(&[ctx.half_zeros, h])?
                };
                let read = topic_attention(&mut ctx.tape, padded, level.topic_proj, level.topic_bias, ctx.net.topics)?;
                q = Some(read.q);
            }
        }
    }
    fwd.iter()
        .zip(&bwd)
        .map(|(f, b)| ctx.tape.concat(&[*f, *b]))
        .collect()
}

/// `v_t = tanh(W_v h_t + b)`, `beta = softmax(v_t · c)`, `pooled = Σ beta_t h_t`.
fn final_attention(ctx: &mut ForwardCtx, level: &Level<Var>, hidden: &[Var]) -> Result<(Var, Var)> {
    let mut projected = Vec::with_capacity(hidden.len());
    for &h in hidden {
        let wh = ctx.tape.matmul(level.attn_proj, h)?;
        let pre = ctx.tape.add(wh, level.attn_bias)?;
        projected.push(ctx.tape.tanh(pre));
    }
    let v = ctx.tape.stack(&projected)?;
    let scores = ctx.tape.matmul(v, level.context)?;
    let beta = ctx.tape.softmax(scores)?;
    let pooled = weighted_sum(ctx, hidden, beta)?;
    Ok((beta, pooled))
}

fn weighted_sum(ctx: &mut ForwardCtx, rows: &[Var], weights: Var) -> Result<Var> {
    let stacked = ctx.tape.stack(rows)?;
    let t = ctx.tape.transpose(stacked)?;
    ctx.tape.matmul(t, weights)
}

fn uniform_weights(ctx: &mut ForwardCtx, len: usize) -> Var {
    ctx.tape.constant(Tensor::filled(&[len], 1.0 / len as f64))
}

fn diagnostic_reads(ctx: &mut ForwardCtx, level: &Level<Var>, hidden: &[Var]) -> Result<Vec<TopicRead>> {
    hidden
        .iter()
        .map(|&h| topic_attention(&mut ctx.tape, h, level.topic_proj, level.topic_bias, ctx.net.topics))
        .collect()
}

/// Encodes one level of the hierarchy with topical or plain GRUs and final attention.
fn encode_level(ctx: &mut ForwardCtx, level: &Level<Var>, inputs: &[Var], topical: bool) -> Result<SequenceVars> {
    let hidden = bidirectional(ctx, level, inputs, topical)?;
    let mut attended = Vec::with_capacity(hidden.len());
    for &h in &hidden {
        attended.push(ctx.dropout(h)?);
    }
    let (beta, pooled) = final_attention(ctx, level, &attended)?;
    let topic_reads = if topical && ctx.mode.diagnostics {
        diagnostic_reads(ctx, level, &hidden)?
    } else {
        Vec::new()
    };
    Ok(SequenceVars {
        hidden,
        beta,
        pooled,
        topic_reads,
    })
}

fn embed_sentence(ctx: &mut ForwardCtx, word_ids: &[usize]) -> Result<Vec<Var>> {
    if word_ids.is_empty() {
        return Err(TdamError::Empty("sentence"));
    }
    let mut xs = Vec::with_capacity(word_ids.len());
    for &id in word_ids {
        let e = ctx.embed(id)?;
        xs.push(ctx.dropout(e)?);
    }
    Ok(xs)
}

/// Word-level encoder: embeddings, bidirectional topical GRU, final attention.
pub fn encode_sentence(ctx: &mut ForwardCtx, word_ids: &[usize], topical: bool) -> Result<SequenceVars> {
    let xs = embed_sentence(ctx, word_ids)?;
    let level = ctx.net.word.clone();
    encode_level(ctx, &level, &xs, topical)
}

/// Full hierarchical encoder: sentences, then the sentence-level topical GRU
/// and attention producing the document representation.
pub fn encode_document(ctx: &mut ForwardCtx, sentences: &[Vec<usize>], topical: bool) -> Result<DocumentVars> {
    if sentences.is_empty() {
        return Err(TdamError::Empty("document"));
    }
    let mut encoded = Vec::with_capacity(sentences.len());
    for s in sentences {
        encoded.push(encode_sentence(ctx, s, topical)?);
    }
    let reps: Vec<Var> = encoded.iter().map(|s| s.pooled).collect();
    let level = ctx.net.sentence.clone();
    let document = encode_level(ctx, &level, &reps, topical)?;
    Ok(DocumentVars {
        sentences: encoded,
        document,
    })
}

/// Class posteriors of the two task heads.
#[derive(Debug, Clone, Copy)]
pub struct HeadOutputs {
    pub sentiment: Var,
    pub domain: Var,
}

fn head(tape: &mut Tape, h: &Head<Var>, m: Var) -> Result<Var> {
    let logits = tape.matmul(h.weight, m)?;
    let logits = tape.add(logits, h.bias)?;
    tape.softmax(logits)
}

/// `p = softmax(W m + b)` for the sentiment and the domain head.
pub fn classify(ctx: &mut ForwardCtx, doc_rep: Var) -> Result<HeadOutputs> {
    let (s, d) = (ctx.net.sentiment.clone(), ctx.net.domain.clone());
    Ok(HeadOutputs {
        sentiment: head(&mut ctx.tape, &s, doc_rep)?,
        domain: head(&mut ctx.tape, &d, doc_rep)?,
    })
}

/// A document encoder variant selectable by name.
pub trait DocumentEncoder: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the variant reads local topic embeddings inside its GRUs.
    fn topical(&self) -> bool;

    fn encode(&self, ctx: &mut ForwardCtx, sentences: &[Vec<usize>]) -> Result<DocumentVars>;
}

/// Topic-dependent hierarchical attention model.
pub struct TopicalHierarchical;

impl DocumentEncoder for TopicalHierarchical {
    fn name(&self) -> &'static str {
        "tdam"
    }

    fn topical(&self) -> bool {
        true
    }

    fn encode(&self, ctx: &mut ForwardCtx, sentences: &[Vec<usize>]) -> Result<DocumentVars> {
        encode_document(ctx, sentences, true)
    }
}

/// The same hierarchy with the topic pathway detached (HAN-style).
pub struct PlainHierarchical;

impl DocumentEncoder for PlainHierarchical {
    fn name(&self) -> &'static str {
        "han"
    }

    fn topical(&self) -> bool {
        false
    }

    fn encode(&self, ctx: &mut ForwardCtx, sentences: &[Vec<usize>]) -> Result<DocumentVars> {
        encode_document(ctx, sentences, false)
    }
}

/// Whole document read as one word sequence by a plain BiGRU; the document
/// representation is the mean hidden state. Sentence entries pool their own
/// span uniformly and exist for diagnostics only.
pub struct FlatBiGru;

impl DocumentEncoder for FlatBiGru {
    fn name(&self) -> &'static str {
        "bigru"
    }

    fn topical(&self) -> bool {
        false
    }

    fn encode(&self, ctx: &mut ForwardCtx, sentences: &[Vec<usize>]) -> Result<DocumentVars> {
        if sentences.is_empty() {
            return Err(TdamError::Empty("document"));
        }
        let mut xs = Vec::new();
        let mut spans = Vec::with_capacity(sentences.len());
        for s in sentences {
            let start = xs.len();
            xs.extend(embed_sentence(ctx, s)?);
            spans.push(start..xs.len());
        }
        let level = ctx.net.word.clone();
        let hidden = bidirectional(ctx, &level, &xs, false)?;
        let mut sentence_vars = Vec::with_capacity(spans.len());
        for span in spans {
            let hs = hidden[span].to_vec();
            let beta = uniform_weights(ctx, hs.len());
            let pooled = weighted_sum(ctx, &hs, beta)?;
            sentence_vars.push(SequenceVars {
                hidden: hs,
                beta,
                pooled,
                topic_reads: Vec::new(),
            });
        }
        let mut attended = Vec::with_capacity(hidden.len());
        for &h in &hidden {
            attended.push(ctx.dropout(h)?);
        }
        let beta = uniform_weights(ctx, attended.len());
        let pooled = weighted_sum(ctx, &attended, beta)?;
        let reps: Vec<Var> = sentence_vars.iter().map(|s| s.pooled).collect();
        let sent_beta = uniform_weights(ctx, reps.len());
        Ok(DocumentVars {
            sentences: sentence_vars,
            document: SequenceVars {
                hidden: reps,
                beta: sent_beta,
                pooled,
                topic_reads: Vec::new(),
            },
        })
    }
}

pub const DEFAULT_ENCODER: &str = "tdam";

/// Registry holding every built-in encoder variant.
pub fn encoder_registry() -> Registry<dyn DocumentEncoder> {
    let mut reg: Registry<dyn DocumentEncoder> = Registry::new();
    reg.register("tdam", Box::new(TopicalHierarchical))
        .register("han", Box::new(PlainHierarchical))
        .register("bigru", Box::new(FlatBiGru));
    reg
}

/// Plain-value view of an encoded document.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDocument {
    /// Sentence representations `s_i`.
    pub sentence_reps: Vec<Vec<f64>>,
    /// Document representation `m_d`.
    pub doc_rep: Vec<f64>,
    /// Per sentence, per word bidirectional hidden state.
    pub word_hidden: Vec<Vec<Vec<f64>>>,
    pub sentence_hidden: Vec<Vec<f64>>,
    /// Per sentence, per word topic weights (empty for non-topical encoders).
    pub word_alphas: Vec<Vec<Vec<f64>>>,
    pub sentence_alphas: Vec<Vec<f64>>,
    pub word_q: Vec<Vec<Vec<f64>>>,
    pub sentence_q: Vec<Vec<f64>>,
    pub word_betas: Vec<Vec<f64>>,
    pub sentence_betas: Vec<f64>,
    pub sentiment_probs: Vec<f64>,
    pub domain_probs: Vec<f64>,
}

fn vals(tape: &Tape, v: Var) -> Vec<f64> {
    tape.value(v).data().to_vec()
}

impl EncodedDocument {
    pub fn from_vars(tape: &Tape, doc: &DocumentVars, heads: &HeadOutputs) -> Self {
        let seq_reads = |s: &SequenceVars| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
            s.topic_reads
                .iter()
                .map(|r| (vals(tape, r.alpha), vals(tape, r.q)))
                .unzip()
        };
        let mut word_alphas = Vec::new();
        let mut word_q = Vec::new();
        for s in &doc.sentences {
            let (a, q) = seq_reads(s);
            word_alphas.push(a);
            word_q.push(q);
        }
        let (sentence_alphas, sentence_q) = seq_reads(&doc.document);
        Self {
            sentence_reps: doc.sentences.iter().map(|s| vals(tape, s.pooled)).collect(),
            doc_rep: vals(tape, doc.document.pooled),
            word_hidden: doc
                .sentences
                .iter()
                .map(|s| s.hidden.iter().map(|h| vals(tape, *h)).collect())
                .collect(),
            sentence_hidden: doc.document.hidden.iter().map(|h| vals(tape, *h)).collect(),
            word_alphas,
            sentence_alphas,
            word_q,
            sentence_q,
            word_betas: doc.sentences.iter().map(|s| vals(tape, s.beta)).collect(),
            sentence_betas: vals(tape, doc.document.beta),
            sentiment_probs: vals(tape, heads.sentiment),
            domain_probs: vals(tape, heads.domain),
        }
    }
}

/// Runs `encoder` on one document in inference mode and returns plain values.
pub fn encode_values(
    encoder: &dyn DocumentEncoder,
    params: &TdamParams,
    sentences: &[Vec<usize>],
    mode: ForwardMode,
) -> Result<EncodedDocument> {
    let mut ctx = ForwardCtx::new(params, mode);
    let doc = encoder.encode(&mut ctx, sentences)?;
    let heads = classify(&mut ctx, doc.doc_rep())?;
    Ok(EncodedDocument::from_vars(&ctx.tape, &doc, &heads))
}
