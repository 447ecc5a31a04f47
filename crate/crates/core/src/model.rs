//! Data model for latent class analysis with weighted responses.
//!
//! A population of `N` subjects splits into `K` disjoint latent profiles
//! (classification matrix `Z`, or equivalently a label vector). The item
//! parameter matrix `Θ` (J×K) holds the expected response of a profile-`k`
//! subject on item `j`, and the population response matrix is `R₀ = ZΘ'`.
//! The observed matrix `R` is drawn entrywise from a distribution with mean
//! `R₀(i, j)`.
//!
//! Labels are 0-based throughout the library; emitted artifacts (reports,
//! CSV files, error messages) use 1-based profile numbers.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard partition of `n` subjects into `k` non-empty latent profiles.
///
/// Construction checks that every label is in `0..k` and that no profile is
/// empty — the precondition for identifiability of `(Z, Θ)` from `ZΘ'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl ClassAssignment {
    /// Builds the assignment from a 0-based label vector.
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 || labels.is_empty() {
            return Err(Error::DegenerateInput {
                context: format!(
                    "class assignment needs n >= 1 and k >= 1, got n={}, k={k}",
                    labels.len()
                ),
            });
        }
        let mut sizes = vec![0usize; k];
        for (index, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(Error::LabelOutOfRange { index, label, k });
            }
            sizes[label] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyClass { class: empty + 1 });
        }
        Ok(Self { labels, k })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Subjects per profile; all entries are >= 1 by construction.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &label in &self.labels {
            sizes[label] += 1;
        }
        sizes
    }

    pub fn min_class_size(&self) -> usize {
        self.class_sizes().into_iter().min().unwrap_or(0)
    }

    pub fn max_class_size(&self) -> usize {
        self.class_sizes().into_iter().max().unwrap_or(0)
    }

    /// The one-hot classification matrix `Z` (N×K): row `i` has a single 1
    /// in column `labels[i]`.
    pub fn to_matrix(&self) -> Array2<f64> {
        let mut z = Array2::zeros((self.labels.len(), self.k));
        for (i, &label) in self.labels.iter().enumerate() {
            z[(i, label)] = 1.0;
        }
        z
    }

    /// Relabels profiles: new label = `perm[old label]`. `perm` must be a
    /// permutation of `0..k`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::DimensionMismatch {
                context: format!("permutation length {} != k {}", perm.len(), self.k),
            });
        }
        let mut seen = vec![false; self.k];
        for &p in perm {
            if p >= self.k || seen[p] {
                return Err(Error::InvalidConfig {
                    context: format!("{perm:?} is not a permutation of 0..{}", self.k),
                });
            }
            seen[p] = true;
        }
        let labels = self.labels.iter().map(|&l| perm[l]).collect();
        Ok(Self { labels, k: self.k })
    }
}

/// Item parameter matrix together with its scaling split `Θ = ρ·B`,
/// where `ρ = max |Θ(j,k)|` and `max |B(j,k)| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemParams {
    theta: Array2<f64>,
    rho: f64,
    b: Array2<f64>,
}

impl ItemParams {
    /// Splits `theta` into its scaling parameter and normalized matrix.
    pub fn new(theta: Array2<f64>) -> Result<Self> {
        let (rho, b) = scaling_split(theta.view())?;
        Ok(Self { theta, rho, b })
    }

    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn b(&self) -> &Array2<f64> {
        &self.b
    }

    pub fn items(&self) -> usize {
        self.theta.nrows()
    }

    pub fn profiles(&self) -> usize {
        self.theta.ncols()
    }
}

/// Whether a response matrix holds observed draws or the population means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseKind {
    Observed,
    Population,
}

/// An N×J response matrix, tagged as observed or population-level.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    values: Array2<f64>,
    kind: ResponseKind,
}

impl ResponseMatrix {
    pub fn observed(values: Array2<f64>) -> Self {
        Self {
            values,
            kind: ResponseKind::Observed,
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    pub fn subjects(&self) -> usize {
        self.values.nrows()
    }

    pub fn items(&self) -> usize {
        self.values.ncols()
    }
}

/// The seven sampling distributions whose mean structure the model supports.
///
/// Each kind fixes the legal domain for population means, the legal range
/// of the scaling parameter, and variance/deviation bounds used by
/// [`check_assumption`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    Bernoulli,
    /// Number of successes in `m` trials with success probability `R₀/m`.
    Binomial {
        m: u32,
    },
    Poisson,
    Normal {
        sigma2: f64,
    },
    /// Rate `1/R₀`, so the mean is `R₀`.
    Exponential,
    /// `Uniform(0, 2·R₀)`, so the mean is `R₀`.
    Uniform,
    /// `±1` responses with `P(+1) = (1 + R₀)/2`.
    Signed,
}

impl DistributionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::Bernoulli => "bernoulli",
            DistributionSpec::Binomial { .. } => "binomial",
            DistributionSpec::Poisson => "poisson",
            DistributionSpec::Normal { .. } => "normal",
            DistributionSpec::Exponential => "exponential",
            DistributionSpec::Uniform => "uniform",
            DistributionSpec::Signed => "signed",
        }
    }

    /// Upper end of the legal scaling range `(0, hi]`; unbounded kinds
    /// report infinity.
    pub fn rho_upper(&self) -> f64 {
        match self {
            DistributionSpec::Bernoulli | DistributionSpec::Signed => 1.0,
            DistributionSpec::Binomial { m } => f64::from(*m),
            _ => f64::INFINITY,
        }
    }

    pub fn validate_rho(&self, rho: f64) -> Result<()> {
        let hi = self.rho_upper();
        if rho.is_finite() && rho > 0.0 && rho <= hi {
            Ok(())
        } else {
            Err(Error::RhoOutOfRange {
                rho,
                hi,
                kind: self.name(),
            })
        }
    }

    /// Whether `x` is a legal population mean for this kind.
    pub fn mean_in_domain(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            DistributionSpec::Bernoulli => (0.0..=1.0).contains(&x),
            DistributionSpec::Binomial { m } => x >= 0.0 && x <= f64::from(*m),
            DistributionSpec::Poisson => x >= 0.0,
            DistributionSpec::Normal { .. } => true,
            // Open at zero: a zero mean has no valid parameterization.
            DistributionSpec::Exponential | DistributionSpec::Uniform => x > 0.0,
            DistributionSpec::Signed => (-1.0..=1.0).contains(&x),
        }
    }

    /// Whether the normalized matrix `B` may carry negative entries.
    pub fn symmetric_b(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Normal { .. } | DistributionSpec::Signed
        )
    }

    /// Upper bound on the maximum response variance; exact for Normal.
    pub fn gamma_bound(&self, rho: f64) -> f64 {
        match self {
            DistributionSpec::Bernoulli
            | DistributionSpec::Binomial { .. }
            | DistributionSpec::Poisson => rho,
            DistributionSpec::Normal { sigma2 } => *sigma2,
            DistributionSpec::Exponential => rho * rho,
            DistributionSpec::Uniform => rho * rho / 3.0,
            DistributionSpec::Signed => 1.0,
        }
    }

    /// True when [`Self::gamma_bound`] is the exact maximum variance rather
    /// than an upper bound (only Normal).
    pub fn gamma_is_exact(&self) -> bool {
        matches!(self, DistributionSpec::Normal { .. })
    }

    /// Upper bound on the maximum absolute deviation `|R − R₀|`, when one
    /// is known for the kind.
    pub fn tau_bound(&self) -> Option<f64> {
        match self {
            DistributionSpec::Bernoulli => Some(1.0),
            DistributionSpec::Binomial { m } => Some(f64::from(*m)),
            DistributionSpec::Signed => Some(2.0),
            _ => None,
        }
    }

    /// Entrywise variance of a response with mean `r0`, used by moment
    /// checks on generated data.
    pub fn variance_at(&self, r0: f64) -> f64 {
        match self {
            DistributionSpec::Bernoulli => r0 * (1.0 - r0),
            DistributionSpec::Binomial { m } => r0 * (1.0 - r0 / f64::from(*m)),
            DistributionSpec::Poisson => r0,
            DistributionSpec::Normal { sigma2 } => *sigma2,
            DistributionSpec::Exponential => r0 * r0,
            DistributionSpec::Uniform => r0 * r0 / 3.0,
            DistributionSpec::Signed => 1.0 - r0 * r0,
        }
    }
}

/// Verdict of the consistency-condition check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    /// The deviation bound τ is unknown for this kind, so the condition
    /// cannot be decided.
    Indeterminate,
}

/// Result of checking `γ ≥ τ²·log(N+J)/max(N,J)` with the per-kind bounds
/// substituted for γ and τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Bound on the maximum response variance (exact for Normal).
    pub gamma_bound: f64,
    pub gamma_is_exact: bool,
    /// Bound on the maximum absolute deviation, `None` when unknown.
    pub tau_bound: Option<f64>,
    /// `τ²·log(N+J)/max(N,J)`; `None` when τ is unknown.
    pub threshold: Option<f64>,
    pub verdict: Verdict,
}

/// Builds the population response matrix `R₀ = ZΘ'`, i.e.
/// `R₀(i, j) = Θ(j, ℓ(i))`.
pub fn population_matrix(z: &ClassAssignment, theta: &ItemParams) -> Result<ResponseMatrix> {
    if theta.profiles() != z.k() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "item parameters have {} profiles but assignment has {}",
                theta.profiles(),
                z.k()
            ),
        });
    }
    let n = z.n();
    let j = theta.items();
    let th = theta.theta();
    let mut values = Array2::zeros((n, j));
    for (i, &label) in z.labels().iter().enumerate() {
        for jj in 0..j {
            values[(i, jj)] = th[(jj, label)];
        }
    }
    Ok(ResponseMatrix {
        values,
        kind: ResponseKind::Population,
    })
}

/// Splits `theta` into `(ρ, B)` with `ρ = max |Θ(j,k)|` and `B = Θ/ρ`, so
/// that `max |B(j,k)| = 1` exactly (the maximizing entry divides by itself).
pub fn scaling_split(theta: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
    for ((row, col), &x) in theta.indexed_iter() {
        if !x.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    let rho = theta.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if rho == 0.0 {
        return Err(Error::AllZero);
    }
    let b = theta.mapv(|x| x / rho);
    Ok((rho, b))
}

/// Per-profile item means: entry `(j, k)` is the average of `R(i, j)` over
/// subjects assigned to profile `k`. Applied to `R₀` this recovers `Θ`
/// exactly; applied to observed data it approximates the estimated item
/// parameters.
pub fn profile_means(r: &ResponseMatrix, z: &ClassAssignment) -> Result<Array2<f64>> {
    if r.subjects() != z.n() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "response matrix has {} subjects but assignment has {}",
                r.subjects(),
                z.n()
            ),
        });
    }
    let j = r.items();
    let k = z.k();
    let sizes = z.class_sizes();
    let mut sums = Array2::<f64>::zeros((j, k));
    for (i, &label) in z.labels().iter().enumerate() {
        for jj in 0..j {
            sums[(jj, label)] += r.values()[(i, jj)];
        }
    }
    for kk in 0..k {
        let size = sizes[kk] as f64;
        for jj in 0..j {
            sums[(jj, kk)] /= size;
        }
    }
    Ok(sums)
}

/// Evaluates the consistency condition `γ ≥ τ²·log(N+J)/max(N,J)` using the
/// kind's variance bound for γ and deviation bound for τ. Kinds without a
/// known τ produce an indeterminate verdict.
pub fn check_assumption(
    spec: &DistributionSpec,
    rho: f64,
    n: usize,
    j: usize,
) -> Result<AssumptionReport> {
    spec.validate_rho(rho)?;
    if n == 0 || j == 0 {
        return Err(Error::DegenerateInput {
            context: format!("need n >= 1 and j >= 1, got n={n}, j={j}"),
        });
    }
    let gamma_bound = spec.gamma_bound(rho);
    let tau_bound = spec.tau_bound();
    let threshold = tau_bound.map(|tau| {
        let log_term = ((n + j) as f64).ln();
        tau * tau * log_term / (n.max(j) as f64)
    });
    let verdict = match threshold {
        Some(t) if gamma_bound >= t => Verdict::Satisfied,
        Some(_) => Verdict::Violated,
        None => Verdict::Indeterminate,
    };
    Ok(AssumptionReport {
        gamma_bound,
        gamma_is_exact: spec.gamma_is_exact(),
        tau_bound,
        threshold,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_hot_basic() {
        let z = ClassAssignment::from_labels(vec![0, 0, 1], 2).unwrap();
        assert_eq!(z.to_matrix(), array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(z.class_sizes(), vec![2, 1]);
    }

    #[test]
    fn one_hot_identity() {
        let z = ClassAssignment::from_labels(vec![0, 1, 2], 3).unwrap();
        assert_eq!(z.to_matrix(), Array2::<f64>::eye(3));
    }

    #[test]
    fn one_hot_rejects_empty_class() {
        let err = ClassAssignment::from_labels(vec![0, 0, 0], 2).unwrap_err();
        assert!(matches!(err, Error::EmptyClass { class: 2 }));
    }

    #[test]
    fn one_hot_rejects_out_of_range_label() {
        let err = ClassAssignment::from_labels(vec![0, 2], 2).unwrap_err();
        assert!(matches!(
            err,
            Error::LabelOutOfRange {
                index: 1,
                label: 2,
                k: 2
            }
        ));
    }

    #[test]
    fn population_matrix_fixed_design() {
        // Two profiles over ten items: profile 1 is flat at 100, profile 2
        // steps down from 100 to 10.
        let mut theta = Array2::zeros((10, 2));
        for j in 0..10 {
            theta[(j, 0)] = 100.0;
            theta[(j, 1)] = 110.0 - 10.0 * (j as f64 + 1.0);
        }
        let labels: Vec<usize> = (0..16).map(|i| usize::from(i >= 8)).collect();
        let z = ClassAssignment::from_labels(labels, 2).unwrap();
        let r0 = population_matrix(&z, &ItemParams::new(theta).unwrap()).unwrap();
        for j in 0..10 {
            assert_eq!(r0.values()[(0, j)], 100.0);
            assert_eq!(r0.values()[(15, j)], 110.0 - 10.0 * (j as f64 + 1.0));
        }
        assert_eq!(r0.kind(), ResponseKind::Population);
    }

    #[test]
    fn population_matrix_single_profile() {
        let theta = ItemParams::new(array![[0.3], [0.7], [0.1]]).unwrap();
        let z = ClassAssignment::from_labels(vec![0, 0, 0, 0], 1).unwrap();
        let r0 = population_matrix(&z, &theta).unwrap();
        for i in 0..4 {
            assert_eq!(r0.values()[(i, 0)], 0.3);
            assert_eq!(r0.values()[(i, 1)], 0.7);
            assert_eq!(r0.values()[(i, 2)], 0.1);
        }
    }

    #[test]
    fn population_matrix_matches_entry_loop() {
        // Brute-force oracle: R0(i, j) must equal theta(j, label(i)).
        use crate::generators::{sample_classes, sample_item_params, RngHandle};
        let mut rng = RngHandle::new(7);
        let z = sample_classes(10, 3, &mut rng).unwrap();
        let params = sample_item_params(&DistributionSpec::Bernoulli, 4, 3, 0.8, &mut rng).unwrap();
        let r0 = population_matrix(&z, &params).unwrap();
        for i in 0..10 {
            for j in 0..4 {
                assert_eq!(r0.values()[(i, j)], params.theta()[(j, z.labels()[i])]);
            }
        }
    }

    #[test]
    fn population_matrix_dimension_mismatch() {
        let theta = ItemParams::new(array![[0.3, 0.5], [0.7, 0.2]]).unwrap();
        let z = ClassAssignment::from_labels(vec![0, 1, 2], 3).unwrap();
        assert!(matches!(
            population_matrix(&z, &theta),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn scaling_split_direct() {
        let (rho, b) = scaling_split(array![[0.2], [-0.4]].view()).unwrap();
        assert_eq!(rho, 0.4);
        assert_eq!(b, array![[0.5], [-1.0]]);
    }

    #[test]
    fn scaling_split_fixed_point() {
        let theta = array![[1.0, 0.25], [-0.5, 0.75]];
        let (rho, b) = scaling_split(theta.view()).unwrap();
        assert_eq!(rho, 1.0);
        assert_eq!(b, theta);
    }

    #[test]
    fn scaling_split_fixed_design_rho() {
        // max |Θ| over the step-down design evaluates to 100.
        let mut theta = Array2::zeros((10, 2));
        for j in 0..10 {
            theta[(j, 0)] = 100.0;
            theta[(j, 1)] = 110.0 - 10.0 * (j as f64 + 1.0);
        }
        let (rho, _) = scaling_split(theta.view()).unwrap();
        assert_eq!(rho, 100.0);
    }

    #[test]
    fn scaling_split_round_trip() {
        let theta = array![[0.31, -0.7], [0.11, 0.64], [-0.02, 0.5]];
        let (rho, b) = scaling_split(theta.view()).unwrap();
        let max_abs_b = b.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        assert_eq!(max_abs_b, 1.0);
        for (orig, recon) in theta.iter().zip((rho * &b).iter()) {
            assert!((orig - recon).abs() <= 1e-15 * orig.abs().max(1.0));
        }
    }

    #[test]
    fn scaling_split_all_zero() {
        assert!(matches!(
            scaling_split(Array2::zeros((2, 2)).view()),
            Err(Error::AllZero)
        ));
    }

    #[test]
    fn profile_means_recovers_theta_from_population() {
        let theta = array![[0.2, 0.9], [0.4, 0.1], [0.6, 0.5]];
        let params = ItemParams::new(theta.clone()).unwrap();
        let z = ClassAssignment::from_labels(vec![0, 1, 0, 1, 1], 2).unwrap();
        let r0 = population_matrix(&z, &params).unwrap();
        let means = profile_means(&r0, &z).unwrap();
        let max_theta = theta.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        for (m, t) in means.iter().zip(theta.iter()) {
            assert!((m - t).abs() <= 1e-12 * max_theta);
        }
    }

    #[test]
    fn profile_means_singleton_classes() {
        let r = ResponseMatrix::observed(array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let z = ClassAssignment::from_labels(vec![0, 1], 2).unwrap();
        let means = profile_means(&r, &z).unwrap();
        assert_eq!(means, array![[1.0, 4.0], [2.0, 5.0], [3.0, 6.0]]);
    }

    #[test]
    fn profile_means_matches_loop_oracle() {
        use crate::generators::RngHandle;
        use rand::Rng;
        let mut rng = RngHandle::new(11);
        let values = Array2::from_shape_fn((6, 4), |_| rng.gen::<f64>());
        let r = ResponseMatrix::observed(values.clone());
        let z = ClassAssignment::from_labels(vec![0, 1, 0, 1, 0, 1], 2).unwrap();
        let means = profile_means(&r, &z).unwrap();
        for j in 0..4 {
            for k in 0..2 {
                let members: Vec<usize> = (0..6).filter(|&i| z.labels()[i] == k).collect();
                let expect: f64 =
                    members.iter().map(|&i| values[(i, j)]).sum::<f64>() / members.len() as f64;
                assert!((means[(j, k)] - expect).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn assumption_bernoulli_satisfied() {
        // Oracle: threshold is 1² · ln(200)/100 ≈ 0.0530, below γ = ρ = 0.5.
        let report = check_assumption(&DistributionSpec::Bernoulli, 0.5, 100, 100).unwrap();
        let expect = (200.0f64).ln() / 100.0;
        let threshold = report.threshold.unwrap();
        assert!((threshold - expect).abs() <= 1e-12 * expect);
        assert_eq!(report.gamma_bound, 0.5);
        assert!(!report.gamma_is_exact);
        assert_eq!(report.verdict, Verdict::Satisfied);
    }

    #[test]
    fn assumption_signed_satisfied() {
        // γ = 1 against threshold 4 · ln(200)/100 ≈ 0.212.
        let report = check_assumption(&DistributionSpec::Signed, 0.5, 100, 100).unwrap();
        let expect = 4.0 * (200.0f64).ln() / 100.0;
        let threshold = report.threshold.unwrap();
        assert!((threshold - expect).abs() <= 1e-12 * expect);
        assert_eq!(report.verdict, Verdict::Satisfied);
        assert_eq!(report.tau_bound, Some(2.0));
    }

    #[test]
    fn assumption_poisson_indeterminate() {
        let report = check_assumption(&DistributionSpec::Poisson, 3.0, 200, 40).unwrap();
        assert_eq!(report.verdict, Verdict::Indeterminate);
        assert_eq!(report.tau_bound, None);
        assert_eq!(report.threshold, None);
        assert_eq!(report.gamma_bound, 3.0);
    }

    #[test]
    fn assumption_bernoulli_violated_when_sparse() {
        // ρ far below log(N+J)/max(N,J) at tiny sizes.
        let report = check_assumption(&DistributionSpec::Bernoulli, 0.01, 10, 10).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
    }

    #[test]
    fn assumption_normal_gamma_exact() {
        let report =
            check_assumption(&DistributionSpec::Normal { sigma2: 2.0 }, 1.5, 100, 20).unwrap();
        assert!(report.gamma_is_exact);
        assert_eq!(report.gamma_bound, 2.0);
        assert_eq!(report.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn rho_range_checks() {
        assert!(check_assumption(&DistributionSpec::Bernoulli, 1.2, 10, 10).is_err());
        assert!(check_assumption(&DistributionSpec::Binomial { m: 5 }, 5.5, 10, 10).is_err());
        assert!(check_assumption(&DistributionSpec::Signed, 0.0, 10, 10).is_err());
        assert!(check_assumption(&DistributionSpec::Poisson, 100.0, 10, 10).is_ok());
    }

    #[test]
    fn permuted_assignment_round_trip() {
        let z = ClassAssignment::from_labels(vec![0, 1, 2, 1], 3).unwrap();
        let p = z.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &[2, 0, 1, 0]);
        assert!(z.permuted(&[0, 0, 1]).is_err());
    }
}
