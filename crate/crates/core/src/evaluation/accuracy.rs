use crate::error::{Result, TdamError};

/// Exact-match fraction.
pub fn accuracy(preds: &[usize], golds: &[usize]) -> Result<f64> {
    if preds.len() != golds.len() {
        return Err(TdamError::Shape {
            op: "accuracy",
            left: vec![preds.len()],
            right: vec![golds.len()],
        });
    }
    if preds.is_empty() {
        return Err(TdamError::Empty("predictions"));
    }
    let hits = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(TdamError::Empty("values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simple_fractions() {
        assert_eq!(accuracy(&[1, 2, 0], &[1, 2, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2, 0, 0], &[1, 2, 0, 1]).unwrap(), 0.75);
        assert!(accuracy(&[1], &[1, 2]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn mean_and_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.7]).unwrap(), (0.7, 0.0));
    }

    proptest! {
        #[test]
        fn invariant_under_reordering(pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..50), seed: u64) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (p, g): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let (ps, gs): (Vec<_>, Vec<_>) = shuffled.into_iter().unzip();
            prop_assert_eq!(accuracy(&p, &g).unwrap(), accuracy(&ps, &gs).unwrap());
        }
    }
}
