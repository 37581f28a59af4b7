//! Two-dimensional projections of embedding sets.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Result, TdamError};
use crate::registry::Registry;

pub type Point2 = [f64; 2];

/// A projection method selectable by name.
pub trait Projector: Send + Sync {
    fn name(&self) -> &'static str;
    fn project(&self, points: &[Vec<f64>], seed: u64) -> Result<Vec<Point2>>;
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points.first().map(Vec::len).ok_or(TdamError::Empty("point set"))?;
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(TdamError::Shape {
            op: "projection",
            left: vec![dim],
            right: vec![p.len()],
        });
    }
    Ok(dim)
}

/// Principal-component projection onto the two leading axes. Each axis is
/// oriented so that its largest-magnitude loading is positive.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pca;

pub fn pca_2d(points: &[Vec<f64>]) -> Result<Vec<Point2>> {
    let dim = check_points(points)?;
    let n = points.len();
    let mean: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, dim, |i, j| points[i][j] - mean[j]);
    let cov = x.transpose() * &x;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut axes = Vec::with_capacity(2);
    for &k in order.iter().take(2) {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let lead = v.iter().copied().fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
        if lead < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
        axes.push(v);
    }
    while axes.len() < 2 {
        axes.push(vec![0.0; dim]);
    }
    Ok((0..n)
        .map(|i| {
            let row = x.row(i);
            let dot = |a: &[f64]| row.iter().zip(a).map(|(r, c)| r * c).sum::<f64>();
            [dot(&axes[0]), dot(&axes[1])]
        })
        .collect())
}

impl Projector for Pca {
    fn name(&self) -> &'static str {
        "pca"
    }

    fn project(&self, points: &[Vec<f64>], _seed: u64) -> Result<Vec<Point2>> {
        pca_2d(points)
    }
}

/// Exact t-SNE (pairwise affinities, no tree approximation).
#[derive(Debug, Clone, Copy)]
pub struct Tsne {
    pub perplexity: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    /// Start from the scaled PCA projection instead of a seeded Gaussian draw.
    pub pca_init: bool,
}

impl Default for Tsne {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            learning_rate: 200.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            pca_init: true,
        }
    }
}

const INIT_STD: f64 = 1e-4;
const MIN_GAIN: f64 = 0.01;

fn squared_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .par_iter()
        .map(|a| points.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()).collect())
        .collect()
}

/// Conditional affinities of row `i` at the precision matching `perplexity`.
fn row_affinities(d: &[f64], i: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let (mut lo, mut hi, mut beta) = (0.0f64, f64::INFINITY, 1.0f64);
    // shift by the nearest neighbour distance for stability
    let dmin = d.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let mut p = vec![0.0; d.len()];
    for _ in 0..100 {
        for (j, pj) in p.iter_mut().enumerate() {
            *pj = if j == i { 0.0 } else { (-(d[j] - dmin) * beta).exp() };
        }
        let sum: f64 = p.iter().sum();
        p.iter_mut().for_each(|pj| *pj /= sum);
        let h: f64 = p.iter().filter(|pj| **pj > 0.0).map(|pj| -pj * pj.ln()).sum();
        if (h - target).abs() < 1e-5 {
            break;
        }
        if h > target {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    p
}

impl Tsne {
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 3 {
            return Err(TdamError::invalid(format!("t-SNE needs at least 3 points, got {n}")));
        }
        if !(self.perplexity > 0.0) || self.perplexity >= n as f64 {
            return Err(TdamError::invalid(format!(
                "perplexity {} must be positive and below the point count {n}",
                self.perplexity
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TdamError::invalid("t-SNE learning rate must be positive"));
        }
        Ok(())
    }

    fn initial(&self, points: &[Vec<f64>], seed: u64) -> Result<Vec<Point2>> {
        if self.pca_init {
            let y = pca_2d(points)?;
            let n = y.len() as f64;
            let mean = y.iter().map(|p| p[0]).sum::<f64>() / n;
            let std = (y.iter().map(|p| (p[0] - mean).powi(2)).sum::<f64>() / n).sqrt();
            let scale = if std > 0.0 { INIT_STD / std } else { 1.0 };
            Ok(y.into_iter().map(|[a, b]| [a * scale, b * scale]).collect())
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, INIT_STD).expect("valid deviation");
            Ok((0..points.len()).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect())
        }
    }

    pub fn embed(&self, points: &[Vec<f64>], seed: u64) -> Result<Vec<Point2>> {
        check_points(points)?;
        let n = points.len();
        self.validate(n)?;
        let d = squared_distances(points);
        let cond: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| row_affinities(&d[i], i, self.perplexity)).collect();
        let p: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(1e-12)).collect())
            .collect();

        let mut y = self.initial(points, seed)?;
        let mut velocity = vec![[0.0; 2]; n];
        let mut gains = vec![[1.0f64; 2]; n];
        for it in 0..self.iterations {
            let exaggeration = if it < self.exaggeration_iterations { self.early_exaggeration } else { 1.0 };
            let momentum = if it < self.exaggeration_iterations { 0.5 } else { 0.8 };
            let num: Vec<Vec<f64>> = y
                .par_iter()
                .enumerate()
                .map(|(i, a)| {
                    y.iter()
                        .enumerate()
                        .map(|(j, b)| if i == j { 0.0 } else { 1.0 / (1.0 + (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)) })
                        .collect()
                })
                .collect();
            let z: f64 = num.iter().map(|r| r.iter().sum::<f64>()).sum();
            let grad: Vec<Point2> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut g = [0.0; 2];
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let w = (exaggeration * p[i][j] - num[i][j] / z) * num[i][j];
                        g[0] += 4.0 * w * (y[i][0] - y[j][0]);
                        g[1] += 4.0 * w * (y[i][1] - y[j][1]);
                    }
                    g
                })
                .collect();
            for i in 0..n {
                for c in 0..2 {
                    gains[i][c] = if (grad[i][c] > 0.0) != (velocity[i][c] > 0.0) {
                        gains[i][c] + 0.2
                    } else {
                        (gains[i][c] * 0.8).max(MIN_GAIN)
                    };
                    velocity[i][c] = momentum * velocity[i][c] - self.learning_rate * gains[i][c] * grad[i][c];
                    y[i][c] += velocity[i][c];
                }
            }
            let mean = [y.iter().map(|p| p[0]).sum::<f64>() / n as f64, y.iter().map(|p| p[1]).sum::<f64>() / n as f64];
            y.iter_mut().for_each(|p| {
                p[0] -= mean[0];
                p[1] -= mean[1];
            });
        }
        Ok(y)
    }
}

impl Projector for Tsne {
    fn name(&self) -> &'static str {
        "tsne"
    }

    fn project(&self, points: &[Vec<f64>], seed: u64) -> Result<Vec<Point2>> {
        self.embed(points, seed)
    }
}

pub const DEFAULT_PROJECTION: &str = "tsne";

/// Registry of projection methods, with `tsne` configured by `tsne`.
pub fn projector_registry(tsne: Tsne) -> Registry<dyn Projector> {
    let mut reg: Registry<dyn Projector> = Registry::new();
    reg.register("tsne", Box::new(tsne)).register("pca", Box::new(Pca));
    reg
}
