//! Independent oracles for integration tests: a full one-sided-Jacobi SVD,
//! brute-force clustering and alignment searches, and direct formula
//! transcriptions of the partition metrics. Nothing here calls the library
//! paths under test.
//!
//! Each integration target compiles its own copy, so not every oracle is
//! referenced everywhere.
#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};

/// Full thin SVD by one-sided Jacobi on an explicit copy of the matrix.
/// Returns (u, sigma, v) with sigma descending; works for any shape.
pub fn full_svd_oracle(m: ArrayView2<f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (rows, cols) = m.dim();
    if cols > rows {
        let (u, sigma, v) = full_svd_oracle(m.t().to_owned().view());
        return (v, sigma, u);
    }
    let mut w = m.to_owned();
    let mut v = Array2::<f64>::eye(cols);
    for _sweep in 0..200 {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for r in 0..rows {
                    aii += w[(r, i)] * w[(r, i)];
                    ajj += w[(r, j)] * w[(r, j)];
                    aij += w[(r, i)] * w[(r, j)];
                }
                if aij.abs() <= 1e-30 + 1e-15 * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (ajj - aii) / (2.0 * aij);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let x = w[(r, i)];
                    let y = w[(r, j)];
                    w[(r, i)] = c * x - s * y;
                    w[(r, j)] = s * x + c * y;
                }
                for r in 0..cols {
                    let x = v[(r, i)];
                    let y = v[(r, j)];
                    v[(r, i)] = c * x - s * y;
                    v[(r, j)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut triplets: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..cols)
        .map(|col| {
            let norm = w.column(col).iter().map(|x| x * x).sum::<f64>().sqrt();
            let u_col = if norm > 0.0 {
                w.column(col).iter().map(|x| x / norm).collect()
            } else {
                vec![0.0; rows]
            };
            (norm, u_col, v.column(col).to_vec())
        })
        .collect();
    triplets.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let sigma: Vec<f64> = triplets.iter().map(|t| t.0).collect();
    let mut u_sorted = Array2::zeros((rows, cols));
    let mut v_sorted = Array2::zeros((cols, cols));
    for (idx, (_, u_col, v_col)) in triplets.iter().enumerate() {
        for r in 0..rows {
            u_sorted[(r, idx)] = u_col[r];
        }
        for r in 0..cols {
            v_sorted[(r, idx)] = v_col[r];
        }
    }
    (u_sorted, sigma, v_sorted)
}

/// Spectral norm straight from the oracle SVD.
pub fn spectral_norm_oracle(m: ArrayView2<f64>) -> f64 {
    full_svd_oracle(m).1[0]
}

/// All permutations of 0..k by plain recursion.
pub fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    fn recurse(remaining: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for idx in 0..remaining.len() {
            let item = remaining.remove(idx);
            prefix.push(item);
            recurse(remaining, prefix, out);
            prefix.pop();
            remaining.insert(idx, item);
        }
    }
    let mut out = Vec::new();
    recurse(&mut (0..k).collect(), &mut Vec::new(), &mut out);
    out
}

/// Best two-cluster sum of squares by exhausting every non-trivial
/// bipartition.
pub fn best_two_partition(points: ArrayView2<f64>) -> (f64, Vec<usize>) {
    let (n, d) = points.dim();
    assert!((2..=20).contains(&n), "exhaustive search only for small n");
    let mut best = (f64::INFINITY, vec![0; n]);
    // Point 0 stays in cluster 0 to kill the mirror symmetry.
    for mask in 0..(1u32 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| {
                if i == 0 {
                    0
                } else {
                    usize::from((mask >> (i - 1)) & 1 == 1)
                }
            })
            .collect();
        if !labels.contains(&1) {
            continue;
        }
        let mut cost = 0.0;
        for cluster in 0..2 {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == cluster).collect();
            let mut centroid = vec![0.0; d];
            for &i in &members {
                for col in 0..d {
                    centroid[col] += points[(i, col)];
                }
            }
            for value in &mut centroid {
                *value /= members.len() as f64;
            }
            for &i in &members {
                for col in 0..d {
                    let diff = points[(i, col)] - centroid[col];
                    cost += diff * diff;
                }
            }
        }
        if cost < best.0 {
            best = (cost, labels);
        }
    }
    best
}

fn contingency(truth: &[usize], est: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut c = vec![vec![0usize; k]; k];
    for (&t, &e) in truth.iter().zip(est) {
        c[t][e] += 1;
    }
    c
}

/// Clustering error transcribed from its set definition: for each
/// permutation, the worst per-class proportion of the symmetric difference
/// between the true class and its aligned estimate.
pub fn clustering_error_oracle(truth: &[usize], est: &[usize], k: usize) -> f64 {
    let n = truth.len();
    let mut best = f64::INFINITY;
    for perm in all_permutations(k) {
        let mut worst = f64::NEG_INFINITY;
        for (class, &mapped) in perm.iter().enumerate() {
            let mut in_true_not_est = 0usize;
            let mut in_est_not_true = 0usize;
            let mut true_size = 0usize;
            for i in 0..n {
                let in_true = truth[i] == class;
                let in_est = est[i] == mapped;
                if in_true {
                    true_size += 1;
                    if !in_est {
                        in_true_not_est += 1;
                    }
                } else if in_est {
                    in_est_not_true += 1;
                }
            }
            let value = (in_true_not_est + in_est_not_true) as f64 / true_size as f64;
            worst = worst.max(value);
        }
        best = best.min(worst);
    }
    best
}

/// Misclassification rate minimized over relabelings, by brute force.
pub fn hamming_error_oracle(truth: &[usize], est: &[usize], k: usize) -> f64 {
    let mut best = usize::MAX;
    for perm in all_permutations(k) {
        let mismatches = truth
            .iter()
            .zip(est)
            .filter(|&(&t, &e)| perm[t] != e)
            .count();
        best = best.min(mismatches);
    }
    best as f64 / truth.len() as f64
}

/// NMI transcribed term by term from the contingency table.
pub fn nmi_oracle(truth: &[usize], est: &[usize], k: usize) -> f64 {
    let n = truth.len() as f64;
    let c = contingency(truth, est, k);
    let row: Vec<f64> = (0..k).map(|r| c[r].iter().sum::<usize>() as f64).collect();
    let col: Vec<f64> = (0..k)
        .map(|l| (0..k).map(|r| c[r][l]).sum::<usize>() as f64)
        .collect();
    let mut numerator = 0.0;
    for r in 0..k {
        for l in 0..k {
            let cell = c[r][l] as f64;
            if cell > 0.0 {
                numerator += -2.0 * cell * (cell * n / (row[r] * col[l])).ln();
            }
        }
    }
    let denominator: f64 = row.iter().map(|&x| x * (x / n).ln()).sum::<f64>()
        + col.iter().map(|&x| x * (x / n).ln()).sum::<f64>();
    if denominator == 0.0 {
        return 1.0;
    }
    numerator / denominator
}

/// ARI transcribed from pair counting.
pub fn ari_oracle(truth: &[usize], est: &[usize], k: usize) -> f64 {
    let c = contingency(truth, est, k);
    let comb2 = |x: usize| x as f64 * (x as f64 - 1.0) / 2.0;
    let row: Vec<usize> = (0..k).map(|r| c[r].iter().sum()).collect();
    let col: Vec<usize> = (0..k).map(|l| (0..k).map(|r| c[r][l]).sum()).collect();
    let cells: f64 = c.iter().flatten().map(|&x| comb2(x)).sum();
    let rows: f64 = row.iter().map(|&x| comb2(x)).sum();
    let cols: f64 = col.iter().map(|&x| comb2(x)).sum();
    let total = comb2(truth.len());
    if total == 0.0 {
        return 1.0;
    }
    let expected = rows * cols / total;
    let denominator = 0.5 * (rows + cols) - expected;
    if denominator == 0.0 {
        let identical = truth
            .iter()
            .zip(est)
            .all(|(&t, &e)| (0..truth.len()).all(|i| (truth[i] == t) == (est[i] == e)));
        return if identical { 1.0 } else { 0.0 };
    }
    (cells - expected) / denominator
}

/// Relative item-parameter errors by brute force over column relabelings.
pub fn relative_errors_oracle(theta: ArrayView2<f64>, theta_hat: ArrayView2<f64>) -> (f64, f64) {
    let (j, k) = theta.dim();
    let mut best_l1 = f64::INFINITY;
    let mut best_sq = f64::INFINITY;
    for perm in all_permutations(k) {
        let mut l1 = 0.0;
        let mut sq = 0.0;
        for est_col in 0..k {
            for row in 0..j {
                let d = theta_hat[(row, est_col)] - theta[(row, perm[est_col])];
                l1 += d.abs();
                sq += d * d;
            }
        }
        best_l1 = best_l1.min(l1);
        best_sq = best_sq.min(sq);
    }
    let n1: f64 = theta.iter().map(|x| x.abs()).sum();
    let n2: f64 = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    (best_l1 / n1, best_sq.sqrt() / n2)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
