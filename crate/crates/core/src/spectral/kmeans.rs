//! Lloyd's K-means with k-means++ seeding.
//!
//! Assignment ties go to the lowest centroid index. Empty clusters are
//! repaired by reseeding the empty centroid at the point farthest from its
//! own centroid (among clusters that can spare a point), which keeps the
//! objective non-increasing.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::generators::RngHandle;

#[derive(Debug, Clone)]
pub struct KmeansConfig {
    pub max_iters: usize,
    pub restarts: usize,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            restarts: 1,
        }
    }
}

/// Clustering outcome. Labels are 0-based cluster indices; `objective` is
/// the within-cluster sum of squared distances for the returned labels and
/// centroids, and `objective_trace` records it after every assignment pass.
#[derive(Debug, Clone)]
pub struct KmeansResult {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

/// Clusters the rows of `points` into `k` groups.
pub fn kmeans(
    points: ArrayView2<f64>,
    k: usize,
    config: &KmeansConfig,
    rng: &mut RngHandle,
) -> Result<KmeansResult> {
    let (n, d) = points.dim();
    if k == 0 || n < k || d == 0 {
        return Err(Error::DegenerateInput {
            context: format!("k-means needs n >= k >= 1 and d >= 1, got n={n}, d={d}, k={k}"),
        });
    }
    let restarts = config.restarts.max(1);
    let mut best: Option<KmeansResult> = None;
    for _ in 0..restarts {
        let run = lloyd(points, k, config.max_iters, rng);
        let replace = match &best {
            Some(current) => run.objective < current.objective,
            None => true,
        };
        if replace {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd(points: ArrayView2<f64>, k: usize, max_iters: usize, rng: &mut RngHandle) -> KmeansResult {
    let n = points.nrows();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = assign(points, &centroids);
    repair_empty(points, &mut centroids, &mut labels);
    let mut trace = vec![objective(points, &centroids, &labels)];
    let mut iterations = 0;

    for iter in 1..=max_iters {
        centroids = means(points, &labels, k);
        let mut new_labels = assign(points, &centroids);
        repair_empty(points, &mut centroids, &mut new_labels);
        trace.push(objective(points, &centroids, &new_labels));
        iterations = iter;
        if new_labels == labels {
            break;
        }
        labels = new_labels;
    }

    debug_assert_eq!(labels.len(), n);
    let objective = objective(points, &centroids, &labels);
    KmeansResult {
        labels,
        centroids,
        objective,
        iterations,
        objective_trace: trace,
    }
}

/// k-means++ seeding: first centroid uniform, each next centroid drawn with
/// probability proportional to the squared distance to the nearest chosen
/// one.
fn plus_plus_init(points: ArrayView2<f64>, k: usize, rng: &mut RngHandle) -> Array2<f64> {
    let (n, d) = points.dim();
    let mut centroids = Array2::zeros((k, d));
    let first = rng.gen_range(0..n);
    centroids.row_mut(0).assign(&points.row(first));

    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // All remaining mass is zero (duplicate points); any index works.
            rng.gen_range(0..n)
        };
        centroids.row_mut(c).assign(&points.row(chosen));
        for (i, slot) in nearest.iter_mut().enumerate() {
            let dist = squared_distance(points.row(i), centroids.row(c));
            if dist < *slot {
                *slot = dist;
            }
        }
    }
    centroids
}

fn assign(points: ArrayView2<f64>, centroids: &Array2<f64>) -> Vec<usize> {
    let n = points.nrows();
    let k = centroids.nrows();
    let mut labels = vec![0usize; n];
    for (i, label) in labels.iter_mut().enumerate() {
        let mut best = 0usize;
        let mut best_dist = squared_distance(points.row(i), centroids.row(0));
        for c in 1..k {
            let dist = squared_distance(points.row(i), centroids.row(c));
            if dist < best_dist {
                best_dist = dist;
                best = c;
            }
        }
        *label = best;
    }
    labels
}

fn means(points: ArrayView2<f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let d = points.ncols();
    let mut sums = Array2::zeros((k, d));
    let mut counts = vec![0usize; k];
    for (i, &label) in labels.iter().enumerate() {
        counts[label] += 1;
        for col in 0..d {
            sums[(label, col)] += points[(i, col)];
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let size = counts[c] as f64;
            for col in 0..d {
                sums[(c, col)] /= size;
            }
        }
    }
    sums
}

/// Moves each empty cluster's centroid onto the point farthest from its own
/// centroid, drawn only from clusters of size >= 2 so no new cluster
/// empties out. The stolen point's cost drops to zero, so the objective
/// never increases.
fn repair_empty(points: ArrayView2<f64>, centroids: &mut Array2<f64>, labels: &mut [usize]) {
    let k = centroids.nrows();
    let mut sizes = vec![0usize; k];
    for &label in labels.iter() {
        sizes[label] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut pick: Option<(usize, f64)> = None;
        for (i, &label) in labels.iter().enumerate() {
            if sizes[label] < 2 {
                continue;
            }
            let dist = squared_distance(points.row(i), centroids.row(label));
            let better = match pick {
                Some((_, best)) => dist > best,
                None => true,
            };
            if better {
                pick = Some((i, dist));
            }
        }
        if let Some((i, _)) = pick {
            sizes[labels[i]] -= 1;
            labels[i] = empty;
            sizes[empty] = 1;
            centroids.row_mut(empty).assign(&points.row(i));
        }
    }
}

fn objective(points: ArrayView2<f64>, centroids: &Array2<f64>, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &label)| squared_distance(points.row(i), centroids.row(label)))
        .sum()
}

fn squared_distance(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}
