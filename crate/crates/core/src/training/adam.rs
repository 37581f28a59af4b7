use std::collections::BTreeMap;

use crate::error::{Result, TdamError};
use crate::model::TdamParams;

/// Gradient of a loss with respect to every parameter.
///
/// `network` follows the order of `Network::leaves`; embedding rows are kept
/// sparse since a batch touches few of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub network: Vec<Vec<f64>>,
    pub embedding_rows: BTreeMap<usize, Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &TdamParams) -> Self {
        Self {
            network: params.net.leaves().iter().map(|(_, t)| vec![0.0; t.len()]).collect(),
            embedding_rows: BTreeMap::new(),
        }
    }

    /// Adds `other` in place; callers fix the summation order.
    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.network.iter_mut().zip(&other.network) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (id, row) in &other.embedding_rows {
            match self.embedding_rows.get_mut(id) {
                Some(acc) => acc.iter_mut().zip(row).for_each(|(x, y)| *x += y),
                None => {
                    self.embedding_rows.insert(*id, row.clone());
                }
            }
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.network.iter().flatten().chain(self.embedding_rows.values().flatten())
    }

    pub fn global_norm(&self) -> f64 {
        self.values().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|g| g.is_finite())
    }

    pub fn scale(&mut self, c: f64) {
        self.network.iter_mut().flatten().for_each(|g| *g *= c);
        self.embedding_rows.values_mut().flatten().for_each(|g| *g *= c);
    }

    /// Rescales to global norm `max_norm` when it is exceeded.
    pub fn clip(&mut self, max_norm: f64) {
        let norm = self.global_norm();
        if norm > max_norm {
            self.scale(max_norm / norm);
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    /// Moments in the order of `TdamParams::tensors_mut`.
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &TdamParams, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params.named().iter().map(|(_, t)| vec![0.0; t.len()]).collect();
        Self {
            beta1,
            beta2,
            epsilon,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    pub fn moment_shapes(&self) -> Vec<usize> {
        self.first.iter().map(Vec::len).collect()
    }

    /// One bias-corrected Adam update.
    pub fn update(&mut self, params: &mut TdamParams, grads: &Gradients, lr: f64) -> Result<()> {
        let d = params.dims.embedding;
        let mut embed_grad = vec![0.0; params.embeddings.len()];
        for (&id, row) in &grads.embedding_rows {
            if id >= params.dims.vocab || row.len() != d {
                return Err(TdamError::invalid(format!("embedding gradient row {id} does not fit the table")));
            }
            embed_grad[id * d..(id + 1) * d].copy_from_slice(row);
        }
        let mut dense: Vec<&[f64]> = vec![&embed_grad];
        dense.extend(grads.network.iter().map(Vec::as_slice));
        let tensors = params.tensors_mut();
        if dense.len() != tensors.len() || dense.iter().zip(&self.first).any(|(g, m)| g.len() != m.len()) {
            return Err(TdamError::invalid("gradient layout does not match parameters"));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((tensor, g), m), v) in tensors.into_iter().zip(dense).zip(&mut self.first).zip(&mut self.second) {
            for (((p, &g), m), v) in tensor.data_mut().iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}
