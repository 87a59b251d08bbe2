//! From a learned representation to cluster labels.
//!
//! Affinities are clustered with the symmetric normalized Laplacian
//! `L = I − D^{-1/2}·W·D^{-1/2}`: the eigenvectors of its `k` smallest eigenvalues are
//! row-normalized and grouped by k-means (k-means++ seeding, [`KMEANS_RESTARTS`]
//! restarts, best inertia wins, ties to the earliest restart).

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{eig_symmetrized, symmetrize};
use crate::{Error, Mat, Result};

pub const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITER: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffinityMode {
    /// `(|Z| + |Zᵀ|)/2`
    AbsSym,
    /// `|(Z + Zᵀ)/2|`
    PsdDirect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub k: usize,
    pub accuracy: Option<f64>,
    pub seed: u64,
}

impl ClusteringResult {
    /// Scores the labels against ground truth.
    pub fn with_truth(mut self, truth: &[usize]) -> Result<Self> {
        self.accuracy = Some(segmentation_accuracy(&self.labels, truth)?);
        Ok(self)
    }
}

fn require_square(m: &Mat, what: &str) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{what} must be square, got {}×{}", m.rows(), m.cols())));
    }
    Ok(m.rows())
}

/// Symmetric, entrywise nonnegative affinity from a coefficient matrix.
pub fn affinity_from_representation(z: &Mat, mode: AffinityMode) -> Result<Mat> {
    let n = require_square(z, "representation")?;
    let f = |i: usize, j: usize| match mode {
        AffinityMode::AbsSym => 0.5 * (z[(i, j)].abs() + z[(j, i)].abs()),
        AffinityMode::PsdDirect => (0.5 * (z[(i, j)] + z[(j, i)])).abs(),
    };
    Mat::from_fn(n, n, f)
}

/// Gaussian kernel `exp(−‖x_i − x_j‖²/σ²)` between the columns of `x`.
pub fn gaussian_affinity(x: &Mat, sigma: f64) -> Result<Mat> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("gaussian bandwidth must be positive, got {sigma}")));
    }
    let n = x.cols();
    let sq: Vec<f64> = (0..n).map(|j| x.column(j).iter().map(|v| v * v).sum()).collect();
    let gram = x.transpose().matmul(x);
    let s2 = sigma * sigma;
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            let d2 = (sq[i] + sq[j] - gram[(i, j)] - gram[(j, i)]).max(0.0);
            (-d2 / s2).exp()
        }
    })
}

/// Linear kernel `max(x_iᵀx_j, 0)` between the columns of `x`.
pub fn linear_affinity(x: &Mat) -> Mat {
    x.transpose().matmul(x).symmetric_part().map(|v| v.max(0.0))
}

/// Normalized spectral clustering into `k` groups; deterministic for a given `seed`.
pub fn spectral_cluster(w: &Mat, k: usize, seed: u64) -> Result<ClusteringResult> {
    let n = require_square(w, "affinity")?;
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("cluster count {k} must be in 1..={n}")));
    }
    let scale = w.max_abs();
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] < 0.0 {
                return Err(Error::Parameter(format!("negative affinity at ({i}, {j})")));
            }
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::Parameter(format!("affinity is not symmetric at ({i}, {j})")));
            }
        }
    }

    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let deg: f64 = (0..n).map(|j| w[(i, j)]).sum();
            if deg > 0.0 { 1.0 / deg.sqrt() } else { 0.0 }
        })
        .collect();
    // Isolated vertices keep an identity row in L.
    let lap = faer::Mat::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - inv_sqrt_deg[i] * w[(i, j)] * inv_sqrt_deg[j]
    });
    let (vectors, _) = eig_symmetrized(symmetrize(lap.as_ref()).as_ref())?;

    // Descending order: the k smallest eigenvalues sit in the last k columns.
    let mut points: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..k).map(|c| vectors[(i, n - 1 - c)]).collect())
        .collect();
    for p in &mut points {
        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            p.iter_mut().for_each(|v| *v /= norm);
        }
    }

    let labels = kmeans(&points, k, seed);
    Ok(ClusteringResult { labels, k, accuracy: None, seed })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Best-of-restarts Lloyd k-means; labels renumbered by first appearance.
fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let (inertia, labels) = lloyd(points, kmeans_pp(points, k, &mut rng), k);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    let (_, labels) = best.expect("at least one restart");
    canonical_labels(&labels)
}

fn kmeans_pp(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = points[next].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, k: usize) -> (f64, Vec<usize>) {
    let dim = points[0].len();
    let nearest = |p: &[f64], centers: &[Vec<f64>]| {
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(p, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    };
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            // Empty clusters keep their previous center.
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let inertia = points.iter().map(|p| nearest(p, &centers).1).sum();
    (inertia, labels)
}

fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Best fraction of agreeing points over all bijections between predicted and true labels.
pub fn segmentation_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Parameter(format!(
            "label vectors differ in length: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Parameter("empty label vectors".into()));
    }
    let size = pred.iter().chain(truth).max().expect("nonempty") + 1;
    let mut table = Matrix::new(size, size, 0i64);
    for (&p, &t) in pred.iter().zip(truth) {
        table[(p, t)] += 1;
    }
    let (matched, _) = kuhn_munkres(&table);
    Ok(matched as f64 / pred.len() as f64)
}

/// Fraction of `Σ|z_ij|` inside the diagonal blocks given by consecutive group sizes.
/// The zero matrix counts as fully block-diagonal.
pub fn block_diagonal_mass(z: &Mat, group_sizes: &[usize]) -> Result<f64> {
    let n = require_square(z, "representation")?;
    let total_size: usize = group_sizes.iter().sum();
    if total_size != n {
        return Err(Error::Parameter(format!("group sizes sum to {total_size}, matrix has {n} rows")));
    }
    let mut group = Vec::with_capacity(n);
    for (g, &size) in group_sizes.iter().enumerate() {
        group.extend(std::iter::repeat_n(g, size));
    }
    let (mut inside, mut total) = (0.0, 0.0);
    for j in 0..n {
        for (i, v) in z.column(j).iter().enumerate() {
            total += v.abs();
            if group[i] == group[j] {
                inside += v.abs();
            }
        }
    }
    Ok(if total > 0.0 { inside / total } else { 1.0 })
}
