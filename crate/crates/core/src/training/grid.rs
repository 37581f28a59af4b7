use std::cmp::Ordering;

use rayon::prelude::*;

use super::config::{GridSpec, TrainConfig};
use super::loss::EvalSummary;
use super::trainer::{derive_seed, train_model, ModelSpec};
use crate::corpus::Document;
use crate::error::{Result, TdamError};
use crate::model::TdamParams;

/// Every (learning rate, dropout, topic vector size) combination in
/// enumeration order; cell `i` trains with a seed derived from `base.seed` and `i`.
pub fn grid_configs(base: &TrainConfig, grid: &GridSpec) -> Vec<TrainConfig> {
    let mut out = Vec::with_capacity(grid.cell_count());
    for &lr in &grid.learning_rates {
        for &dropout in &grid.dropouts {
            for &size in &grid.topic_vector_sizes {
                let i = out.len() as u64;
                out.push(TrainConfig {
                    learning_rate: lr,
                    dropout,
                    hidden_size: size,
                    seed: derive_seed(base.seed, &[i]),
                    ..base.clone()
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub config: TrainConfig,
    pub dev: EvalSummary,
    pub best_epoch: usize,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    /// Index of the selected cell.
    pub best: usize,
    pub best_params: TdamParams,
}

impl GridResult {
    pub fn best_config(&self) -> &TrainConfig {
        &self.cells[self.best].config
    }
}

fn config_key(c: &TrainConfig) -> [f64; 3] {
    [c.learning_rate, c.dropout, c.hidden_size as f64]
}

/// Higher dev sentiment accuracy, then lower dev loss, then the
/// lexicographically smaller (learning rate, dropout, size) triple.
fn rank(a: &GridCell, b: &GridCell) -> Ordering {
    b.dev
        .sentiment_accuracy
        .total_cmp(&a.dev.sentiment_accuracy)
        .then(a.dev.loss.total_cmp(&b.dev.loss))
        .then_with(|| {
            let (ka, kb) = (config_key(&a.config), config_key(&b.config));
            ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
        })
}

/// Trains one model per grid cell (cells run in parallel) and selects by dev score.
pub fn grid_search(spec: &ModelSpec, train_docs: &[Document], dev_docs: &[Document], base: &TrainConfig) -> Result<GridResult> {
    base.validate()?;
    let configs = grid_configs(base, &base.grid);
    if configs.is_empty() {
        return Err(TdamError::Empty("grid"));
    }
    let outcomes = configs
        .par_iter()
        .map(|c| train_model(spec, train_docs, dev_docs, c))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(outcomes.len());
    let mut params = Vec::with_capacity(outcomes.len());
    for (config, o) in configs.into_iter().zip(outcomes) {
        cells.push(GridCell {
            config,
            dev: o.best_dev,
            best_epoch: o.best_epoch,
        });
        params.push(o.params);
    }
    let best = (0..cells.len()).min_by(|&a, &b| rank(&cells[a], &cells[b])).expect("non-empty grid");
    Ok(GridResult {
        best_params: params.swap_remove(best),
        cells,
        best,
    })
}
