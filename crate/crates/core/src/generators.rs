//! Seeded generation of planted-class instances.
//!
//! Reproducibility contract: the PRNG family is pinned to ChaCha8
//! (`rand_chacha::ChaCha8Rng`), sub-streams are derived with a
//! SplitMix64-style hash of `(seed, stream)`, Normal variates use the
//! Box-Muller transform (cosine branch), Binomial draws sum `m` Bernoulli
//! trials, and Poisson draws sum Knuth product chunks. The same seed
//! therefore yields the same bits on every run.

use ndarray::Array2;
use rand::{Rng, RngCore};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassAssignment, DistributionSpec, ItemParams, ResponseKind, ResponseMatrix};

const RESAMPLE_CAP: usize = 100;
/// Relative floor on σ_K(Θ)/σ_1(Θ); draws below it are rank-deficient and
/// get resampled.
const RANK_TOL: f64 = 1e-10;

/// SplitMix64 finalizer; decorrelates derived seeds.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `(master, stream)`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(master ^ mix64(stream.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// A deterministic random stream. Identical seeds produce identical
/// sequences across runs and platforms.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A child handle keyed on `(seed, stream)`. Derivation depends only on
    /// the original seed, never on how much of this stream was consumed.
    pub fn derive(&self, stream: u64) -> Self {
        Self::new(derive_seed(self.seed, stream))
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Parameters of one synthetic benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDesign {
    pub n: usize,
    pub k: usize,
    pub j: usize,
    pub spec: DistributionSpec,
    pub rho: f64,
    pub replicates: usize,
    pub master_seed: u64,
}

impl SimulationDesign {
    pub fn new(
        n: usize,
        k: usize,
        j: usize,
        spec: DistributionSpec,
        rho: f64,
        replicates: usize,
        master_seed: u64,
    ) -> Result<Self> {
        if n < k || j < k || k == 0 {
            return Err(Error::InvalidConfig {
                context: format!("need n >= k >= 1 and j >= k, got n={n}, j={j}, k={k}"),
            });
        }
        if replicates == 0 {
            return Err(Error::InvalidConfig {
                context: "replicates must be >= 1".to_string(),
            });
        }
        spec.validate_rho(rho)?;
        Ok(Self {
            n,
            k,
            j,
            spec,
            rho,
            replicates,
            master_seed,
        })
    }

    /// Default item count: one item per five subjects, rounded down.
    pub fn default_j(n: usize) -> usize {
        n / 5
    }
}

/// Draws class labels i.i.d. uniform on the `k` profiles, resampling the
/// whole vector while any profile is empty so the result stays uniform
/// conditional on validity.
pub fn sample_classes(n: usize, k: usize, rng: &mut RngHandle) -> Result<ClassAssignment> {
    if n < k || k == 0 {
        return Err(Error::DegenerateInput {
            context: format!("need n >= k >= 1, got n={n}, k={k}"),
        });
    }
    for _ in 0..RESAMPLE_CAP {
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if seen.iter().all(|&s| s) {
            return ClassAssignment::from_labels(labels, k);
        }
    }
    Err(Error::RetriesExhausted {
        attempts: RESAMPLE_CAP,
        context: format!("sampling labels with no empty profile (n={n}, k={k})"),
    })
}

/// Draws the normalized item matrix `B` entrywise uniform on `[0, 1]`
/// (`[-1, 1]` for kinds that allow negative means), rescales by its maximum
/// absolute entry so `max |B| = 1` exactly, and returns `Θ = ρ·B`.
/// Rank-deficient draws (σ_K below `1e-10·σ_1`) are resampled.
pub fn sample_item_params(
    spec: &DistributionSpec,
    j: usize,
    k: usize,
    rho: f64,
    rng: &mut RngHandle,
) -> Result<ItemParams> {
    spec.validate_rho(rho)?;
    if j < k || k == 0 {
        return Err(Error::DegenerateInput {
            context: format!("need j >= k >= 1, got j={j}, k={k}"),
        });
    }
    let symmetric = spec.symmetric_b();
    for _ in 0..RESAMPLE_CAP {
        let mut b = Array2::from_shape_fn((j, k), |_| {
            let u: f64 = rng.gen();
            if symmetric {
                2.0 * u - 1.0
            } else {
                u
            }
        });
        let b_max = b.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if b_max == 0.0 {
            continue;
        }
        b.mapv_inplace(|x| x / b_max);
        if !full_column_rank(&b) {
            continue;
        }
        let theta = b.mapv(|x| rho * x);
        debug_assert!(theta.iter().all(|&x| spec.mean_in_domain(x) || x == 0.0));
        return ItemParams::new(theta);
    }
    Err(Error::RetriesExhausted {
        attempts: RESAMPLE_CAP,
        context: format!("sampling a full-rank item matrix (j={j}, k={k})"),
    })
}

/// σ_K(B) > RANK_TOL · σ_1(B), via the K×K Gram spectrum.
fn full_column_rank(b: &Array2<f64>) -> bool {
    let gram = b.t().dot(b);
    let (eigenvalues, _) = crate::spectral::jacobi_eigh(gram);
    let top = eigenvalues[0].max(0.0);
    let bottom = eigenvalues[eigenvalues.len() - 1].max(0.0);
    bottom.sqrt() > RANK_TOL * top.sqrt()
}

/// Draws an observed response matrix entrywise from `spec` with means given
/// by the population matrix. Every mean must lie in the kind's legal domain.
pub fn sample_responses(
    r0: &ResponseMatrix,
    spec: &DistributionSpec,
    rng: &mut RngHandle,
) -> Result<ResponseMatrix> {
    if r0.kind() != ResponseKind::Population {
        return Err(Error::DegenerateInput {
            context: "sampling requires a population response matrix".to_string(),
        });
    }
    for ((row, col), &mean) in r0.values().indexed_iter() {
        if !spec.mean_in_domain(mean) {
            return Err(Error::DomainViolation {
                row,
                col,
                value: mean,
                kind: spec.name(),
            });
        }
    }
    let values = r0.values().mapv(|mean| draw(spec, mean, rng));
    Ok(ResponseMatrix::observed(values))
}

fn draw(spec: &DistributionSpec, mean: f64, rng: &mut RngHandle) -> f64 {
    match spec {
        DistributionSpec::Bernoulli => draw_bernoulli(mean, rng),
        DistributionSpec::Binomial { m } => {
            let p = mean / f64::from(*m);
            (0..*m).map(|_| draw_bernoulli(p, rng)).sum()
        }
        DistributionSpec::Poisson => draw_poisson(mean, rng),
        DistributionSpec::Normal { sigma2 } => mean + sigma2.sqrt() * draw_standard_normal(rng),
        DistributionSpec::Exponential => -mean * positive_uniform(rng).ln(),
        DistributionSpec::Uniform => 2.0 * mean * positive_uniform(rng),
        DistributionSpec::Signed => {
            if rng.gen::<f64>() < (1.0 + mean) / 2.0 {
                1.0
            } else {
                -1.0
            }
        }
    }
}

fn draw_bernoulli(p: f64, rng: &mut RngHandle) -> f64 {
    if rng.gen::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

/// Uniform on (0, 1): rejects the zero so logs and open intervals are safe.
fn positive_uniform(rng: &mut RngHandle) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Box-Muller, cosine branch.
fn draw_standard_normal(rng: &mut RngHandle) -> f64 {
    let u1 = positive_uniform(rng);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Exact Poisson sampler: additivity splits large means into chunks small
/// enough for Knuth's product method.
fn draw_poisson(mut lambda: f64, rng: &mut RngHandle) -> f64 {
    const CHUNK: f64 = 30.0;
    let mut total = 0.0;
    while lambda > CHUNK {
        total += draw_poisson_knuth(CHUNK, rng);
        lambda -= CHUNK;
    }
    total + draw_poisson_knuth(lambda, rng)
}

fn draw_poisson_knuth(lambda: f64, rng: &mut RngHandle) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let floor = (-lambda).exp();
    let mut count = 0u64;
    let mut product = 1.0;
    loop {
        product *= rng.gen::<f64>();
        if product <= floor {
            return count as f64;
        }
        count += 1;
    }
}
