//! K-means with k-means++ seeding and Lloyd iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, TdamError};

pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
    /// Whether the assignments reached a fixpoint before `max_iter`.
    pub converged: bool,
}

impl KMeans {
    pub fn inertia(&self) -> f64 {
        self.inertia_history.last().copied().unwrap_or(0.0)
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centroids.iter().enumerate() {
        let d = squared_distance(p, centre);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = d2.iter().rposition(|d| *d > 0.0).expect("positive mass");
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && r < *d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        } else {
            // every point coincides with a centroid
            rng.random_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

/// Clusters `points` into `k` groups. Empty clusters are reseeded to the
/// point farthest from its centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    if k == 0 {
        return Err(TdamError::invalid("k must be at least 1"));
    }
    if k > points.len() {
        return Err(TdamError::invalid(format!("k = {k} exceeds the {} points", points.len())));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(TdamError::invalid("points have different dimensions"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut inertia_history = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter.max(1) {
        let nearest_all: Vec<(usize, f64)> = points.par_iter().map(|p| nearest(p, &centroids)).collect();
        let new: Vec<usize> = nearest_all.iter().map(|(c, _)| *c).collect();
        inertia_history.push(nearest_all.iter().map(|(_, d)| d).sum());
        if new == assignments {
            converged = true;
            break;
        }
        assignments = new;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            sums[c].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        let mut taken = Vec::new();
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
                continue;
            }
            let far = (0..points.len())
                .filter(|i| !taken.contains(i))
                .max_by(|&a, &b| nearest_all[a].1.total_cmp(&nearest_all[b].1).then(b.cmp(&a)))
                .expect("k <= points");
            taken.push(far);
            centroids[c] = points[far].clone();
        }
    }
    Ok(KMeans {
        k,
        assignments,
        centroids,
        inertia_history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicate_groups_are_recovered() {
        let mut pts = Vec::new();
        for g in 0..3 {
            for _ in 0..4 {
                pts.push(vec![g as f64 * 10.0, -(g as f64)]);
            }
        }
        let r = kmeans(&pts, 3, 4, 100).unwrap();
        for g in 0..3 {
            let c = r.assignments[g * 4];
            assert!(r.assignments[g * 4..g * 4 + 4].iter().all(|a| *a == c));
        }
        assert_eq!(r.inertia(), 0.0);
    }

    #[test]
    fn singleton_clusters_have_zero_inertia() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let r = kmeans(&pts, 6, 0, 50).unwrap();
        assert_eq!(r.inertia(), 0.0);
    }

    #[test]
    fn invalid_k_rejected() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(kmeans(&pts, 0, 0, 10).is_err());
        assert!(kmeans(&pts, 3, 0, 10).is_err());
    }

    proptest! {
        #[test]
        fn inertia_never_increases(raw in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 4..60), k in 1usize..6, seed: u64) {
            prop_assume!(k <= raw.len());
            let pts: Vec<Vec<f64>> = raw.iter().map(|(a, b)| vec![*a, *b]).collect();
            let r = kmeans(&pts, k, seed, 100).unwrap();
            for w in r.inertia_history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
            }
            prop_assert_eq!(r.assignments.len(), pts.len());
            prop_assert!(r.assignments.iter().all(|a| *a < k));
            prop_assert_eq!(&r, &kmeans(&pts, k, seed, 100).unwrap());
        }
    }
}
