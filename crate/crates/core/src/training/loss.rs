use rayon::prelude::*;

use super::adam::Gradients;
use super::config::TrainConfig;
use crate::corpus::Document;
use crate::error::{Result, TdamError};
use crate::model::{classify, DocumentEncoder, ForwardCtx, ForwardMode, HeadOutputs, TdamParams};
use crate::numerics::{argmax, Tensor, Var};

/// Which task losses are active and how they are weighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub sentiment_weight: f64,
    pub domain_weight: f64,
    /// Without it only the sentiment term enters the loss.
    pub multitask: bool,
}

impl Objective {
    pub fn sentiment_only() -> Self {
        Self {
            sentiment_weight: 1.0,
            domain_weight: 0.0,
            multitask: false,
        }
    }

    pub fn from_config(cfg: &TrainConfig) -> Self {
        Self {
            sentiment_weight: cfg.task_weights[0],
            domain_weight: cfg.task_weights[1],
            multitask: cfg.multitask,
        }
    }
}

/// Records the weighted loss of one document on `ctx.tape`.
pub fn document_loss(
    ctx: &mut ForwardCtx,
    encoder: &dyn DocumentEncoder,
    doc: &Document,
    objective: Objective,
) -> Result<(Var, HeadOutputs)> {
    let domain_label = if objective.multitask {
        Some(doc.domain.ok_or_else(|| TdamError::MissingLabel {
            doc_id: doc.doc_id.clone(),
            task: "domain",
        })?)
    } else {
        None
    };
    let vars = encoder.encode(ctx, &doc.sentences)?;
    let heads = classify(ctx, vars.doc_rep())?;
    let ce = ctx.tape.cross_entropy(heads.sentiment, doc.sentiment)?;
    let mut loss = ctx.tape.scale(ce, objective.sentiment_weight);
    if let Some(label) = domain_label {
        let ce = ctx.tape.cross_entropy(heads.domain, label)?;
        let weighted = ctx.tape.scale(ce, objective.domain_weight);
        loss = ctx.tape.add(loss, weighted)?;
    }
    Ok((loss, heads))
}

/// `Σ_d Σ_j ω_j CE(p_d^(j), y_d^(j))` over `batch`, evaluated without dropout.
pub fn total_loss(
    encoder: &dyn DocumentEncoder,
    params: &TdamParams,
    batch: &[Document],
    objective: Objective,
) -> Result<Tensor> {
    let mut total = 0.0;
    for doc in batch {
        let mut ctx = ForwardCtx::new(params, eval_mode());
        let (loss, _) = document_loss(&mut ctx, encoder, doc, objective)?;
        total += ctx.tape.value(loss).item()?;
    }
    Ok(Tensor::scalar(total))
}

fn eval_mode() -> ForwardMode {
    ForwardMode {
        diagnostics: false,
        ..ForwardMode::inference()
    }
}

/// Loss, predictions and parameter gradients for one document.
#[derive(Debug, Clone)]
pub struct DocumentStep {
    pub loss: f64,
    pub sentiment_pred: usize,
    pub domain_pred: usize,
    pub grads: Gradients,
}

pub fn document_gradients(
    encoder: &dyn DocumentEncoder,
    params: &TdamParams,
    doc: &Document,
    objective: Objective,
    mode: ForwardMode,
) -> Result<DocumentStep> {
    let mut ctx = ForwardCtx::new(params, ForwardMode { differentiable: true, ..mode });
    let (loss, heads) = document_loss(&mut ctx, encoder, doc, objective)?;
    ctx.tape.backward(loss)?;
    let tape = &ctx.tape;
    let network = ctx
        .net
        .leaves()
        .into_iter()
        .map(|(_, &v)| match tape.grad(v) {
            Some(g) => g.to_vec(),
            None => vec![0.0; tape.value(v).len()],
        })
        .collect();
    let embedding_rows = ctx
        .embedding_rows()
        .iter()
        .filter_map(|(&id, &v)| tape.grad(v).map(|g| (id, g.to_vec())))
        .collect();
    Ok(DocumentStep {
        loss: tape.value(loss).item()?,
        sentiment_pred: argmax(tape.value(heads.sentiment).data()),
        domain_pred: argmax(tape.value(heads.domain).data()),
        grads: Gradients {
            network,
            embedding_rows,
        },
    })
}

/// Dataset-level loss and accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    /// Mean per-document loss.
    pub loss: f64,
    pub sentiment_accuracy: f64,
    /// Present when every document carries a domain label.
    pub domain_accuracy: Option<f64>,
}

/// Prediction of one document without dropout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub loss: f64,
    pub sentiment: usize,
    pub domain: usize,
}

pub fn predict(
    encoder: &dyn DocumentEncoder,
    params: &TdamParams,
    docs: &[Document],
    objective: Objective,
) -> Result<Vec<Prediction>> {
    docs.par_iter()
        .map(|doc| {
            let mut ctx = ForwardCtx::new(params, eval_mode());
            let (loss, heads) = document_loss(&mut ctx, encoder, doc, objective)?;
            Ok(Prediction {
                loss: ctx.tape.value(loss).item()?,
                sentiment: argmax(ctx.tape.value(heads.sentiment).data()),
                domain: argmax(ctx.tape.value(heads.domain).data()),
            })
        })
        .collect()
}

pub fn summarize(docs: &[Document], preds: &[Prediction]) -> EvalSummary {
    let n = docs.len().max(1) as f64;
    let loss = preds.iter().map(|p| p.loss).sum::<f64>() / n;
    let correct = docs.iter().zip(preds).filter(|(d, p)| d.sentiment == p.sentiment).count();
    let domain_accuracy = docs.iter().all(|d| d.domain.is_some()).then(|| {
        let c = docs.iter().zip(preds).filter(|(d, p)| d.domain == Some(p.domain)).count();
        c as f64 / n
    });
    EvalSummary {
        loss,
        sentiment_accuracy: correct as f64 / n,
        domain_accuracy,
    }
}

pub fn evaluate(
    encoder: &dyn DocumentEncoder,
    params: &TdamParams,
    docs: &[Document],
    objective: Objective,
) -> Result<EvalSummary> {
    if docs.is_empty() {
        return Err(TdamError::Empty("evaluation set"));
    }
    let preds = predict(encoder, params, docs, objective)?;
    Ok(summarize(docs, &preds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{encoder_registry, ModelDims};

    fn setup() -> (TdamParams, Document) {
        let dims = ModelDims {
            hidden: 4,
            topics: 2,
            embedding: 3,
            vocab: 6,
            sentiment_classes: 3,
            domain_classes: 5,
        };
        let params = crate::training::init_params(dims, 3).unwrap();
        let doc = Document {
            doc_id: "d".into(),
            sentences: vec![vec![2, 3], vec![4]],
            sentiment: 1,
            domain: Some(4),
            annotations: Vec::new(),
        };
        (params, doc)
    }

    fn uniform_heads(p: &mut TdamParams) {
        for h in [&mut p.net.sentiment, &mut p.net.domain] {
            h.weight.data_mut().fill(0.0);
            h.bias.data_mut().fill(0.0);
        }
    }

    #[test]
    fn uniform_heads_give_log_class_counts() {
        let (mut p, doc) = setup();
        uniform_heads(&mut p);
        let reg = encoder_registry();
        let obj = Objective {
            sentiment_weight: 1.0,
            domain_weight: 1.0,
            multitask: true,
        };
        let l = total_loss(reg.get("tdam").unwrap(), &p, &[doc], obj).unwrap();
        assert!((l.item().unwrap() - (3f64.ln() + 5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn zero_domain_weight_matches_sentiment_only_bitwise() {
        let (p, doc) = setup();
        let reg = encoder_registry();
        let enc = reg.get("tdam").unwrap();
        let multi = Objective {
            sentiment_weight: 1.0,
            domain_weight: 0.0,
            multitask: true,
        };
        let a = total_loss(enc, &p, std::slice::from_ref(&doc), multi).unwrap();
        let b = total_loss(enc, &p, &[doc], Objective::sentiment_only()).unwrap();
        assert_eq!(a.item().unwrap().to_bits(), b.item().unwrap().to_bits());
    }

    #[test]
    fn missing_domain_label_is_an_error_in_multitask_mode() {
        let (p, mut doc) = setup();
        doc.domain = None;
        let reg = encoder_registry();
        let obj = Objective {
            multitask: true,
            ..Objective::sentiment_only()
        };
        let e = total_loss(reg.get("tdam").unwrap(), &p, std::slice::from_ref(&doc), obj).unwrap_err();
        assert_eq!(e.kind(), "missing-label");
        assert!(total_loss(reg.get("tdam").unwrap(), &p, &[doc], Objective::sentiment_only()).is_ok());
    }

    #[test]
    fn gradients_cover_used_rows_only() {
        let (p, doc) = setup();
        let reg = encoder_registry();
        let step = document_gradients(
            reg.get("tdam").unwrap(),
            &p,
            &doc,
            Objective::sentiment_only(),
            ForwardMode::training(0.0, 0),
        )
        .unwrap();
        assert_eq!(step.grads.embedding_rows.keys().copied().collect::<Vec<_>>(), vec![2, 3, 4]);
        assert!(step.grads.global_norm() > 0.0);
        // the domain head is outside the single-task loss
        let names: Vec<String> = p.net.leaves().into_iter().map(|(n, _)| n).collect();
        let idx = names.iter().position(|n| n == "domain.weight").unwrap();
        assert!(step.grads.network[idx].iter().all(|g| *g == 0.0));
    }
}
