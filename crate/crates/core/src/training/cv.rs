//! K-fold cross-validation over the training operation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::TrainConfig;
use super::loss::{evaluate, EvalSummary, Objective};
use super::trainer::{train_model, ModelSpec};
use crate::corpus::Document;
use crate::error::{Result, TdamError};
use crate::model::encoder_registry;

/// Document indices of one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` by `seed` and cuts it into `folds` chunks. Fold `i` tests
/// on chunk `i`, tunes on the first half of chunk `i+1` and trains on the rest,
/// so every document is tested exactly once.
pub fn fold_splits(n: usize, folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if folds < 2 {
        return Err(TdamError::invalid(format!("need at least 2 folds, got {folds}")));
    }
    if n < 2 * folds {
        return Err(TdamError::invalid(format!("{n} documents are too few for {folds} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let bounds: Vec<usize> = (0..=folds).map(|i| i * n / folds).collect();
    let chunk = |i: usize| &order[bounds[i]..bounds[i + 1]];
    Ok((0..folds)
        .map(|i| {
            let next = chunk((i + 1) % folds);
            let dev = next[..next.len().div_ceil(2)].to_vec();
            let test = chunk(i).to_vec();
            let mut held = vec![false; n];
            test.iter().chain(&dev).for_each(|&j| held[j] = true);
            let train: Vec<usize> = (0..n).filter(|&j| !held[j]).collect();
            FoldSplit { train, dev, test }
        })
        .collect())
}

/// Seeded `(train, dev)` index split holding out `dev_fraction` of `0..n` (at least one).
pub fn holdout_split(n: usize, dev_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(TdamError::invalid(format!("cannot hold out a dev set from {n} documents")));
    }
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(TdamError::invalid(format!("dev fraction {dev_fraction} outside (0, 1)")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let dev_len = ((n as f64 * dev_fraction).round() as usize).clamp(1, n - 1);
    let mut dev = order[..dev_len].to_vec();
    let mut train = order[dev_len..].to_vec();
    dev.sort_unstable();
    train.sort_unstable();
    Ok((train, dev))
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub best_epoch: usize,
    pub test: EvalSummary,
}

fn pick(docs: &[Document], idx: &[usize]) -> Vec<Document> {
    idx.iter().map(|&i| docs[i].clone()).collect()
}

/// Trains and tests one model per fold.
pub fn cross_validate(spec: &ModelSpec, docs: &[Document], cfg: &TrainConfig, folds: usize) -> Result<Vec<FoldResult>> {
    let registry = encoder_registry();
    let encoder = registry.get(&cfg.encoder)?;
    let objective = Objective::from_config(cfg);
    fold_splits(docs.len(), folds, cfg.seed)?
        .iter()
        .enumerate()
        .map(|(fold, split)| {
            let outcome = train_model(spec, &pick(docs, &split.train), &pick(docs, &split.dev), cfg)?;
            let test = evaluate(encoder, &outcome.params, &pick(docs, &split.test), objective)?;
            log::info!("fold {fold}: test sentiment accuracy {:.4}", test.sentiment_accuracy);
            Ok(FoldResult {
                fold,
                best_epoch: outcome.best_epoch,
                test,
            })
        })
        .collect()
}
