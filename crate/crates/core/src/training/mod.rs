//! Multi-task optimization: initialization, Adam, losses, the training loop,
//! grid search and cross-validation.

mod adam;
mod config;
mod cv;
mod grid;
mod init;
mod loss;
mod trainer;

pub use adam::{AdamState, Gradients};
pub use config::{parse_kv, GridSpec, TrainConfig, DEFAULT_GRAD_CLIP};
pub use cv::{cross_validate, fold_splits, holdout_split, FoldResult, FoldSplit};
pub use grid::{grid_configs, grid_search, GridCell, GridResult};
pub use init::{gram_deviation, init_params, is_weight_matrix, semi_orthogonal};
pub use loss::{
    document_gradients, document_loss, evaluate, predict, summarize, total_loss, DocumentStep, EvalSummary, Objective,
    Prediction,
};
pub use trainer::{
    derive_seed, loss_monotone_after, train, train_model, EpochRecord, ModelSpec, TrainOutcome, METRICS_HEADER,
    MONOTONE_AFTER_EPOCH,
};
