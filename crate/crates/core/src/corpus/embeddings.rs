//! Pretrained word vectors in whitespace-separated text form
//! (`token v1 ... vd` per line, optional `count dim` header line).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::Vocabulary;
use crate::error::{Result, TdamError};
use crate::numerics::Tensor;

pub const DEFAULT_EMBEDDING_DIM: usize = 200;
pub const INIT_RANGE: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct PretrainedTable {
    /// `V×d`; row 0 (padding) is zero.
    pub table: Tensor,
    /// Non-reserved vocabulary entries found in the file.
    pub covered: usize,
    /// Non-reserved vocabulary entries.
    pub total: usize,
}

impl PretrainedTable {
    pub fn coverage(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

/// Uniform `[-0.1, 0.1]` table with a zero padding row.
pub fn random_table(vocab_size: usize, dim: usize, rng: &mut impl Rng) -> Tensor {
    let mut t = Tensor::zeros(&[vocab_size, dim]);
    for r in 1..vocab_size {
        for v in t.row_mut(r) {
            *v = rng.random_range(-INIT_RANGE..=INIT_RANGE);
        }
    }
    t
}

pub fn parse_embeddings(text: &str, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<PretrainedTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = random_table(vocab.len(), dim, &mut rng);
    let mut seen = vec![false; vocab.len()];
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if line_no == 1 && values.len() == 1 && token.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
            continue;
        }
        if values.len() != dim {
            return Err(TdamError::Parse {
                location: format!("line {line_no}"),
                message: format!("expected {dim} values for '{token}', got {}", values.len()),
            });
        }
        let mut row = Vec::with_capacity(dim);
        for v in values {
            row.push(v.parse::<f64>().map_err(|_| TdamError::Parse {
                location: format!("line {line_no}"),
                message: format!("'{v}' is not a number"),
            })?);
        }
        if let Some(id) = vocab.get(token) {
            if id > Vocabulary::UNK && !seen[id] {
                seen[id] = true;
                table.row_mut(id).copy_from_slice(&row);
            }
        }
    }
    let total = vocab.len().saturating_sub(2);
    let covered = seen.iter().filter(|s| **s).count();
    Ok(PretrainedTable { table, covered, total })
}

pub fn load_pretrained_embeddings(path: &Path, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<PretrainedTable> {
    let text = std::fs::read_to_string(path).map_err(|e| TdamError::io(path, e))?;
    parse_embeddings(&text, vocab, dim, seed)
}
