//! Evaluation criteria for estimated partitions and item parameters.
//!
//! Partition metrics are defined up to relabeling, so each one searches
//! over profile permutations: sum-type objectives use exhaustive search for
//! K <= 8 and the Hungarian method beyond; the min-max clustering error
//! uses threshold bottleneck matching on the same cost matrix.

use itertools::Itertools;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ClassAssignment;

/// Largest K solved by exhaustive permutation search.
const EXHAUSTIVE_LIMIT: usize = 8;

/// Co-occurrence counts between two partitions: entry `(k, l)` counts the
/// subjects in true profile `k` and estimated profile `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Array2<usize>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    n: usize,
}

impl ConfusionMatrix {
    pub fn counts(&self) -> &Array2<usize> {
        &self.counts
    }

    /// True class sizes.
    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    /// Estimated class sizes.
    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.counts.nrows()
    }

    /// True when the two partitions coincide as set partitions, i.e. every
    /// row and every column holds exactly one nonzero block.
    pub fn is_identical_partition(&self) -> bool {
        let k = self.k();
        for row in 0..k {
            if (0..k).filter(|&col| self.counts[(row, col)] > 0).count() != 1 {
                return false;
            }
        }
        for col in 0..k {
            if (0..k).filter(|&row| self.counts[(row, col)] > 0).count() != 1 {
                return false;
            }
        }
        true
    }
}

/// Builds the confusion matrix of two same-size, same-K assignments.
pub fn confusion(truth: &ClassAssignment, estimate: &ClassAssignment) -> Result<ConfusionMatrix> {
    if truth.n() != estimate.n() || truth.k() != estimate.k() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "confusion needs matching shapes, got ({}, {}) vs ({}, {})",
                truth.n(),
                truth.k(),
                estimate.n(),
                estimate.k()
            ),
        });
    }
    let k = truth.k();
    let mut counts = Array2::zeros((k, k));
    for (&t, &e) in truth.labels().iter().zip(estimate.labels()) {
        counts[(t, e)] += 1;
    }
    let row_sums = (0..k).map(|r| counts.row(r).sum()).collect();
    let col_sums = (0..k).map(|c| counts.column(c).sum()).collect();
    Ok(ConfusionMatrix {
        counts,
        row_sums,
        col_sums,
        n: truth.n(),
    })
}

/// Direction of an assignment search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Optimal row-to-column assignment for a square cost matrix, summing the
/// selected entries. Exhaustive for K <= 8, Hungarian beyond; the two paths
/// agree wherever both run.
pub fn best_permutation(cost: ArrayView2<f64>, sense: Sense) -> Vec<usize> {
    assert_eq!(cost.nrows(), cost.ncols(), "cost matrix must be square");
    if cost.nrows() <= EXHAUSTIVE_LIMIT {
        exhaustive_assignment(cost, sense)
    } else {
        hungarian_assignment(cost, sense)
    }
}

/// Brute-force assignment over all K! permutations. Ties keep the
/// lexicographically first permutation.
pub fn exhaustive_assignment(cost: ArrayView2<f64>, sense: Sense) -> Vec<usize> {
    let k = cost.nrows();
    let mut best_perm: Vec<usize> = (0..k).collect();
    let mut best_total = perm_total(cost, &best_perm);
    for perm in (0..k).permutations(k) {
        let total = perm_total(cost, &perm);
        let better = match sense {
            Sense::Minimize => total < best_total,
            Sense::Maximize => total > best_total,
        };
        if better {
            best_total = total;
            best_perm = perm;
        }
    }
    best_perm
}

fn perm_total(cost: ArrayView2<f64>, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum()
}

/// O(K³) Hungarian method (shortest augmenting paths with potentials).
pub fn hungarian_assignment(cost: ArrayView2<f64>, sense: Sense) -> Vec<usize> {
    let k = cost.nrows();
    assert_eq!(k, cost.ncols(), "cost matrix must be square");
    let sign = match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    // 1-based arrays; p[j] is the row matched to column j.
    let mut u = vec![0.0f64; k + 1];
    let mut v = vec![0.0f64; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = sign * cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; k];
    for j in 1..=k {
        perm[p[j] - 1] = j - 1;
    }
    perm
}

/// Assignment minimizing the maximum selected entry: binary search over the
/// sorted cost values, testing feasibility with Kuhn's matching.
pub fn bottleneck_assignment(cost: ArrayView2<f64>) -> Vec<usize> {
    let k = cost.nrows();
    assert_eq!(k, cost.ncols(), "cost matrix must be square");
    let mut values: Vec<f64> = cost.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();

    let mut lo = 0usize;
    let mut hi = values.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(cost, values[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    perfect_matching(cost, values[lo]).expect("full threshold always matches")
}

/// Kuhn's augmenting-path matching over edges with cost <= threshold.
fn perfect_matching(cost: ArrayView2<f64>, threshold: f64) -> Option<Vec<usize>> {
    let k = cost.nrows();
    let mut match_col: Vec<Option<usize>> = vec![None; k];
    fn try_augment(
        row: usize,
        cost: ArrayView2<f64>,
        threshold: f64,
        visited: &mut [bool],
        match_col: &mut [Option<usize>],
    ) -> bool {
        let k = cost.ncols();
        for col in 0..k {
            if cost[(row, col)] <= threshold && !visited[col] {
                visited[col] = true;
                let free = match match_col[col] {
                    None => true,
                    Some(other) => try_augment(other, cost, threshold, visited, match_col),
                };
                if free {
                    match_col[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }
    for row in 0..k {
        let mut visited = vec![false; k];
        if !try_augment(row, cost, threshold, &mut visited, &mut match_col) {
            return None;
        }
    }
    let mut perm = vec![0usize; k];
    for (col, row) in match_col.iter().enumerate() {
        perm[row.expect("perfect matching")] = col;
    }
    Some(perm)
}

/// Which class size normalizes the per-class symmetric difference.
/// `PerClass` divides class `k`'s count by its own size; `LastClass`
/// divides every count by the size of the final class (the literal reading
/// of the published formula, kept for comparison).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorDenominator {
    PerClass,
    LastClass,
}

/// Pairing costs behind the clustering error: entry `(k, l)` is the
/// symmetric-difference proportion between true profile `k` and estimated
/// profile `l`.
pub fn symmetric_difference_costs(
    confusion: &ConfusionMatrix,
    denominator: ErrorDenominator,
) -> Array2<f64> {
    let k = confusion.k();
    let last = confusion.row_sums()[k - 1] as f64;
    Array2::from_shape_fn((k, k), |(row, col)| {
        let miss = confusion.row_sums()[row] + confusion.col_sums()[col]
            - 2 * confusion.counts()[(row, col)];
        let denom = match denominator {
            ErrorDenominator::PerClass => confusion.row_sums()[row] as f64,
            ErrorDenominator::LastClass => last,
        };
        miss as f64 / denom
    })
}

/// Clustering error: the permutation-minimized maximum per-class
/// symmetric-difference proportion, normalized per class.
pub fn clustering_error(truth: &ClassAssignment, estimate: &ClassAssignment) -> Result<f64> {
    clustering_error_with(truth, estimate, ErrorDenominator::PerClass)
}

/// Clustering error with an explicit denominator convention.
pub fn clustering_error_with(
    truth: &ClassAssignment,
    estimate: &ClassAssignment,
    denominator: ErrorDenominator,
) -> Result<f64> {
    let confusion = confusion(truth, estimate)?;
    let costs = symmetric_difference_costs(&confusion, denominator);
    let k = confusion.k();
    if k <= EXHAUSTIVE_LIMIT {
        let mut best = f64::INFINITY;
        for perm in (0..k).permutations(k) {
            let worst = perm
                .iter()
                .enumerate()
                .map(|(r, &c)| costs[(r, c)])
                .fold(f64::NEG_INFINITY, f64::max);
            if worst < best {
                best = worst;
            }
        }
        Ok(best)
    } else {
        let perm = bottleneck_assignment(costs.view());
        Ok(perm
            .iter()
            .enumerate()
            .map(|(r, &c)| costs[(r, c)])
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Fraction of subjects misclassified under the best profile relabeling.
pub fn hamming_error(truth: &ClassAssignment, estimate: &ClassAssignment) -> Result<f64> {
    let confusion = confusion(truth, estimate)?;
    let agreements = best_agreement(&confusion);
    Ok((confusion.n() - agreements) as f64 / confusion.n() as f64)
}

/// Literal count of differing one-hot matrix entries over N; every
/// misclassified subject contributes two, so the range is [0, 2]. Exposed
/// for comparison with the subject-count convention.
pub fn hamming_error_entrywise(truth: &ClassAssignment, estimate: &ClassAssignment) -> Result<f64> {
    let confusion = confusion(truth, estimate)?;
    let agreements = best_agreement(&confusion);
    Ok(2.0 * (confusion.n() - agreements) as f64 / confusion.n() as f64)
}

fn best_agreement(confusion: &ConfusionMatrix) -> usize {
    let costs = confusion.counts().mapv(|c| c as f64);
    let perm = best_permutation(costs.view(), Sense::Maximize);
    perm.iter()
        .enumerate()
        .map(|(r, &c)| confusion.counts()[(r, c)])
        .sum()
}

/// Normalized mutual information (arithmetic-mean normalization, natural
/// logs). Identical partitions score exactly 1; zero-count cells contribute
/// nothing.
pub fn nmi(truth: &ClassAssignment, estimate: &ClassAssignment) -> Result<f64> {
    let confusion = confusion(truth, estimate)?;
    if confusion.is_identical_partition() {
        return Ok(1.0);
    }
    let n = confusion.n() as f64;
    let k = confusion.k();
    let mut numerator = 0.0;
    for row in 0..k {
        for col in 0..k {
            let c = confusion.counts()[(row, col)] as f64;
            if c > 0.0 {
                let rs = confusion.row_sums()[row] as f64;
                let cs = confusion.col_sums()[col] as f64;
                numerator += -2.0 * c * (c * n / (rs * cs)).ln();
            }
        }
    }
    let mut denominator = 0.0;
    for row in 0..k {
        let rs = confusion.row_sums()[row] as f64;
        denominator += rs * (rs / n).ln();
    }
    for col in 0..k {
        let cs = confusion.col_sums()[col] as f64;
        denominator += cs * (cs / n).ln();
    }
    if denominator == 0.0 {
        // Both partitions put everyone in one profile; only reachable when
        // K = 1, where the identical-partition branch already fired.
        return Ok(1.0);
    }
    Ok(numerator / denominator)
}

/// Adjusted Rand index via pair counting. A degenerate denominator yields 1
/// for identical partitions and 0 otherwise.
pub fn ari(truth: &ClassAssignment, estimate: &ClassAssignment) -> Result<f64> {
    let confusion = confusion(truth, estimate)?;
    let comb2 = |x: usize| {
        let x = x as f64;
        x * (x - 1.0) / 2.0
    };
    let sum_cells: f64 = confusion.counts().iter().map(|&c| comb2(c)).sum();
    let sum_rows: f64 = confusion.row_sums().iter().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = confusion.col_sums().iter().map(|&c| comb2(c)).sum();
    let total = comb2(confusion.n());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denominator = max_index - expected;
    if denominator == 0.0 {
        return Ok(if confusion.is_identical_partition() {
            1.0
        } else {
            0.0
        });
    }
    Ok((sum_cells - expected) / denominator)
}

/// Relative entrywise-l1 and Frobenius errors of an estimated item matrix,
/// each minimized over column permutations of the reference.
pub fn relative_theta_errors(
    theta: ArrayView2<f64>,
    theta_hat: ArrayView2<f64>,
) -> Result<(f64, f64)> {
    if theta.dim() != theta_hat.dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "item matrices must match, got {:?} vs {:?}",
                theta.dim(),
                theta_hat.dim()
            ),
        });
    }
    let l1_norm: f64 = theta.iter().map(|x| x.abs()).sum();
    let fro_norm: f64 = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if l1_norm == 0.0 {
        return Err(Error::ZeroTheta);
    }
    let k = theta.ncols();
    let j = theta.nrows();
    let mut l1_costs = Array2::zeros((k, k));
    let mut sq_costs = Array2::zeros((k, k));
    for est_col in 0..k {
        for true_col in 0..k {
            let mut l1 = 0.0;
            let mut sq = 0.0;
            for row in 0..j {
                let d = theta_hat[(row, est_col)] - theta[(row, true_col)];
                l1 += d.abs();
                sq += d * d;
            }
            l1_costs[(est_col, true_col)] = l1;
            sq_costs[(est_col, true_col)] = sq;
        }
    }
    let p1 = best_permutation(l1_costs.view(), Sense::Minimize);
    let rel_l1: f64 = p1
        .iter()
        .enumerate()
        .map(|(r, &c)| l1_costs[(r, c)])
        .sum::<f64>()
        / l1_norm;
    let p2 = best_permutation(sq_costs.view(), Sense::Minimize);
    let rel_l2: f64 = p2
        .iter()
        .enumerate()
        .map(|(r, &c)| sq_costs[(r, c)])
        .sum::<f64>()
        .sqrt()
        / fro_norm;
    Ok((rel_l1, rel_l2))
}

/// The full six-number criterion vector for one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub clustering_error: f64,
    pub hamming_error: f64,
    pub nmi: f64,
    pub ari: f64,
    pub rel_l1: f64,
    pub rel_l2: f64,
}

/// Computes all six metrics against the planted truth.
pub fn evaluate(
    truth: &ClassAssignment,
    estimate: &ClassAssignment,
    theta: ArrayView2<f64>,
    theta_hat: ArrayView2<f64>,
) -> Result<MetricVector> {
    let (rel_l1, rel_l2) = relative_theta_errors(theta, theta_hat)?;
    Ok(MetricVector {
        clustering_error: clustering_error(truth, estimate)?,
        hamming_error: hamming_error(truth, estimate)?,
        nmi: nmi(truth, estimate)?,
        ari: ari(truth, estimate)?,
        rel_l1,
        rel_l2,
    })
}
