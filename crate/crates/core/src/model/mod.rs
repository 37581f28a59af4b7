//! The topic-dependent hierarchical attention model.

mod cell;
mod checkpoint;
mod encoder;
mod params;

pub use cell::{topic_attention, topical_gru_step, TopicRead};
pub use checkpoint::{content_hash, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use encoder::{
    classify, encode_document, encode_sentence, encode_values, encoder_registry, DocumentEncoder, DocumentVars,
    EncodedDocument, FlatBiGru, ForwardCtx, ForwardMode, HeadOutputs, PlainHierarchical, SequenceVars,
    TopicalHierarchical, DEFAULT_ENCODER,
};
pub use params::{network_shapes, Gru, Head, Level, ModelDims, Network, TdamParams, EMBEDDINGS_NAME};
