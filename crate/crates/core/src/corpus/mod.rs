//! Corpus ingestion: loading, tokenization, vocabulary, pretrained vectors
//! and length-sorted batching.

mod batching;
mod document;
mod embeddings;
mod load;
pub mod synthetic;
mod tokenize;
mod vocab;

pub use batching::{batches, length_batches};
pub use document::{Document, LabelSchema, SentenceAnnotation};
pub use embeddings::{
    load_pretrained_embeddings, parse_embeddings, random_table, PretrainedTable, DEFAULT_EMBEDDING_DIM, INIT_RANGE,
};
pub use load::{load_corpus, parse_corpus, LoadedCorpus, Malformed, TokenizedRecord};
pub use tokenize::{detokenize, split_sentences, tokenize, tokenize_text};
pub use vocab::{build_vocab, Vocabulary};
