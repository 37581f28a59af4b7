use rayon::prelude::*;

use super::adam::{AdamState, Gradients};
use super::config::TrainConfig;
use super::init::init_params;
use super::loss::{document_gradients, evaluate, EvalSummary, Objective};
use crate::corpus::{batches, Document};
use crate::error::{Result, TdamError};
use crate::model::{encoder_registry, DocumentEncoder, ForwardMode, ModelDims, TdamParams};
use crate::numerics::Tensor;

/// Epoch after which the training loss is expected to stop increasing.
pub const MONOTONE_AFTER_EPOCH: usize = 5;

pub const METRICS_HEADER: &str = "epoch\ttrain_loss\ttrain_sentiment_acc\tdev_loss\tdev_sentiment_acc\tdev_domain_acc";

/// Mixes `parts` into `base` (splitmix64 finalizer per part).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(base, |acc, &p| {
        let mut z = acc ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-document training loss seen during the epoch.
    pub train_loss: f64,
    pub train_sentiment_accuracy: f64,
    pub dev: EvalSummary,
}

impl EpochRecord {
    pub fn log_line(&self) -> String {
        let domain = self.dev.domain_accuracy.map_or("-".to_string(), |a| format!("{a:.6}"));
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            self.epoch, self.train_loss, self.train_sentiment_accuracy, self.dev.loss, self.dev.sentiment_accuracy, domain
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best dev epoch.
    pub params: TdamParams,
    pub best_epoch: usize,
    pub best_dev: EvalSummary,
    pub history: Vec<EpochRecord>,
    pub stopped_early: bool,
    /// Set when the training loss rose after `MONOTONE_AFTER_EPOCH`.
    pub non_monotone: bool,
}

/// Whether the training loss never increases after epoch `after`.
pub fn loss_monotone_after(history: &[EpochRecord], after: usize) -> bool {
    history
        .windows(2)
        .filter(|w| w[0].epoch >= after)
        .all(|w| w[1].train_loss <= w[0].train_loss)
}

fn dev_better(new: &EvalSummary, old: &EvalSummary) -> bool {
    new.sentiment_accuracy > old.sentiment_accuracy
        || (new.sentiment_accuracy == old.sentiment_accuracy && new.loss < old.loss)
}

/// Trains `init` with Adam and returns the parameters of the best dev epoch.
pub fn train(
    encoder: &dyn DocumentEncoder,
    init: TdamParams,
    train_docs: &[Document],
    dev_docs: &[Document],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_docs.is_empty() {
        return Err(TdamError::Empty("training set"));
    }
    if dev_docs.is_empty() {
        return Err(TdamError::Empty("development set"));
    }
    let dims = init.dims;
    for d in train_docs.iter().chain(dev_docs) {
        d.validate(dims.sentiment_classes, dims.domain_classes)?;
    }
    let objective = Objective::from_config(cfg);
    let mut params = init;
    let mut adam = AdamState::new(&params, cfg.beta1, cfg.beta2, cfg.epsilon);
    let mut history = Vec::new();
    let mut best: Option<(usize, TdamParams, EvalSummary)> = None;
    let mut since_best = 0;
    let mut stopped_early = false;

    for epoch in 1..=cfg.max_epochs {
        let order = batches(train_docs, cfg.batch_size, derive_seed(cfg.seed, &[epoch as u64]));
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (b, batch) in order.iter().enumerate() {
            let steps = batch
                .par_iter()
                .map(|&i| {
                    let mode = ForwardMode::training(cfg.dropout, derive_seed(cfg.seed, &[epoch as u64, i as u64]));
                    document_gradients(encoder, &params, &train_docs[i], objective, mode)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut grads = Gradients::zeros_like(&params);
            let mut batch_loss = 0.0;
            for (s, &i) in steps.iter().zip(batch) {
                batch_loss += s.loss;
                correct += usize::from(s.sentiment_pred == train_docs[i].sentiment);
                grads.add_assign(&s.grads);
            }
            if !batch_loss.is_finite() || !grads.is_finite() {
                return Err(TdamError::NonFiniteLoss { epoch, batch: b });
            }
            loss_sum += batch_loss;
            if let Some(c) = cfg.grad_clip {
                grads.clip(c);
            }
            adam.update(&mut params, &grads, cfg.learning_rate)?;
        }
        let dev = evaluate(encoder, &params, dev_docs, objective)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train_docs.len() as f64,
            train_sentiment_accuracy: correct as f64 / train_docs.len() as f64,
            dev,
        };
        log::info!("{}", record.log_line());
        history.push(record);

        if best.as_ref().is_none_or(|(_, _, b)| dev_better(&dev, b)) {
            best = Some((epoch, params.clone(), dev));
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience > 0 && since_best >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let non_monotone = !loss_monotone_after(&history, MONOTONE_AFTER_EPOCH);
    if non_monotone {
        log::warn!("training loss increased after epoch {MONOTONE_AFTER_EPOCH}");
    }
    let (best_epoch, best_params, best_dev) = match best {
        Some(b) => b,
        None => {
            let dev = evaluate(encoder, &params, dev_docs, objective)?;
            (0, params, dev)
        }
    };
    Ok(TrainOutcome {
        params: best_params,
        best_epoch,
        best_dev,
        history,
        stopped_early,
        non_monotone,
    })
}

/// Corpus-dependent model sizes; the rest comes from the training configuration.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub vocab: usize,
    pub sentiment_classes: usize,
    pub domain_classes: usize,
    /// Pretrained embedding table; its width overrides `embedding_dim`.
    pub pretrained: Option<Tensor>,
}

impl ModelSpec {
    pub fn dims(&self, cfg: &TrainConfig) -> ModelDims {
        ModelDims {
            hidden: cfg.hidden_size,
            topics: cfg.topics,
            embedding: self.pretrained.as_ref().map_or(cfg.embedding_dim, Tensor::cols),
            vocab: self.vocab,
            sentiment_classes: self.sentiment_classes,
            domain_classes: self.domain_classes.max(1),
        }
    }

    pub fn initial_params(&self, cfg: &TrainConfig) -> Result<TdamParams> {
        let mut params = init_params(self.dims(cfg), cfg.seed)?;
        if let Some(t) = &self.pretrained {
            if t.rows() != self.vocab {
                return Err(TdamError::Shape {
                    op: "pretrained embeddings",
                    left: vec![self.vocab],
                    right: vec![t.rows()],
                });
            }
            params.embeddings = t.clone();
        }
        Ok(params)
    }
}

/// Builds fresh parameters for `cfg` and trains the configured encoder.
pub fn train_model(spec: &ModelSpec, train_docs: &[Document], dev_docs: &[Document], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let registry = encoder_registry();
    let encoder = registry.get(&cfg.encoder)?;
    train(encoder, spec.initial_params(cfg)?, train_docs, dev_docs, cfg)
}
