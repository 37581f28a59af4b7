//! Parameter initialization.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{random_table, INIT_RANGE};
use crate::error::{Result, TdamError};
use crate::model::{ModelDims, TdamParams};
use crate::numerics::Tensor;

/// Row-major `rows×cols` matrix with orthonormal rows or columns, whichever
/// is the smaller dimension.
pub fn semi_orthogonal(rows: usize, cols: usize, rng: &mut impl Rng) -> Result<Tensor> {
    if rows == 0 || cols == 0 {
        return Err(TdamError::invalid(format!("degenerate matrix shape {rows}x{cols}")));
    }
    let (tall, short) = (rows.max(cols), rows.min(cols));
    let g = DMatrix::<f64>::from_fn(tall, short, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // sign fix makes the draw Haar-distributed
    for j in 0..short {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let q = if rows >= cols { q } else { q.transpose() };
    let data = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| q[(i, j)]).collect();
    Tensor::new(vec![rows, cols], data)
}

/// Largest absolute deviation of the smaller-dimension Gram matrix from identity.
pub fn gram_deviation(w: &Tensor) -> f64 {
    let (r, c) = (w.rows(), w.cols());
    let m = DMatrix::from_row_slice(r, c, w.data());
    let g = if r >= c { m.transpose() * &m } else { &m * m.transpose() };
    let k = g.nrows();
    (g - DMatrix::<f64>::identity(k, k)).abs().max()
}

/// Whether the parameter named `name` is initialized semi-orthogonally.
pub fn is_weight_matrix(name: &str, t: &Tensor) -> bool {
    t.shape().len() == 2 && name != "topics" && name != crate::model::EMBEDDINGS_NAME
}

/// Fresh parameters: weight matrices semi-orthogonal, topic embeddings,
/// context vectors and biases uniform in `[-0.1, 0.1]`, embedding table
/// uniform with a zero padding row.
pub fn init_params(dims: ModelDims, seed: u64) -> Result<TdamParams> {
    let mut params = TdamParams::zeros(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    params.embeddings = random_table(dims.vocab, dims.embedding, &mut rng);
    let names: Vec<String> = params.net.leaves().into_iter().map(|(n, _)| n).collect();
    for (name, t) in names.iter().zip(params.net.leaves_mut()) {
        if is_weight_matrix(name, t) {
            *t = semi_orthogonal(t.rows(), t.cols(), &mut rng)?;
        } else {
            t.data_mut()
                .iter_mut()
                .for_each(|v| *v = rng.random_range(-INIT_RANGE..=INIT_RANGE));
        }
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_and_rectangular_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (r, c) in [(4, 4), (6, 3), (3, 6), (1, 5), (5, 1)] {
            let w = semi_orthogonal(r, c, &mut rng).unwrap();
            assert_eq!(w.shape(), &[r, c]);
            assert!(gram_deviation(&w) < 1e-12, "{r}x{c}");
        }
    }

    #[test]
    fn degenerate_shape_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(semi_orthogonal(0, 3, &mut rng).is_err());
    }

    #[test]
    fn zero_dims_rejected() {
        let dims = ModelDims {
            hidden: 4,
            topics: 0,
            embedding: 3,
            vocab: 5,
            sentiment_classes: 3,
            domain_classes: 2,
        };
        assert!(init_params(dims, 0).is_err());
    }
}
