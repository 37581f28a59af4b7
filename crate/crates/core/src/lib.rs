//! Topic-dependent attention model for document-level sentiment analysis.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense tensors and a reverse-mode tape.
//! - [`model`]: parameters, the topical GRU, hierarchical encoders, checkpoints.
//! - [`training`]: initialization, Adam, multi-task losses, grid search.
//! - [`corpus`]: loading, tokenization, vocabulary, embeddings, batching.
//! - [`extraction`]: local-embedding dumps, 2-D projection, K-means, topic ranking.
//! - [`evaluation`]: accuracy, topic coherence and aspect-polarity coherence.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod model;
pub mod numerics;
pub mod registry;
pub mod training;

pub use error::{Result, TdamError};
