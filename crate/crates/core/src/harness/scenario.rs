//! Canned and user-defined benchmark scenarios plus the replicate engine.
//!
//! A scenario sweeps either the scaling parameter or the subject count over
//! a grid (or pins a fixed design), draws `replicates` independent response
//! matrices per grid point, fits each requested method, and aggregates the
//! six criteria plus wall time.
//!
//! Seed discipline: replicate `r` uses `derive_seed(master_seed, r)` for
//! data and per-method sub-streams, independent of the grid point. Sweeps
//! therefore share random draws across grid points (common random numbers),
//! and reports are reproducible for a fixed master seed regardless of how
//! many worker threads run the replicates. Wall-clock fields are the one
//! non-deterministic part of a report.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{rmk, sck, Method};
use crate::generators::{
    derive_seed, sample_classes, sample_item_params, sample_responses, RngHandle,
};
use crate::metrics::{evaluate, MetricVector};
use crate::model::{population_matrix, ClassAssignment, DistributionSpec, ItemParams};

/// Sub-stream indices hung off each replicate seed.
const STREAM_DATA: u64 = 0;
const STREAM_SCK: u64 = 1;
const STREAM_RMK: u64 = 2;

fn default_replicates() -> usize {
    50
}

fn default_methods() -> Vec<Method> {
    vec![Method::Sck, Method::Rmk]
}

fn default_k() -> usize {
    3
}

/// What varies across the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DesignSpec {
    /// Fixed subject count, scaling parameter sweeps over `grid`.
    RhoSweep {
        n: usize,
        #[serde(default = "default_k")]
        k: usize,
        /// Item count; defaults to `n/5`.
        #[serde(default)]
        j: Option<usize>,
        grid: Vec<f64>,
    },
    /// Fixed scaling parameter, subject count sweeps over `grid`.
    NSweep {
        rho: f64,
        #[serde(default = "default_k")]
        k: usize,
        /// Item count; defaults to `n/5` at each grid point.
        #[serde(default)]
        j: Option<usize>,
        grid: Vec<usize>,
    },
    /// Fully pinned design: only the response noise varies per replicate.
    /// `labels` are 1-based profile numbers, matching emitted artifacts;
    /// `theta_rows` holds the J×K item matrix row by row.
    Fixed {
        labels: Vec<usize>,
        theta_rows: Vec<Vec<f64>>,
    },
}

/// One benchmark scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub dist: DistributionSpec,
    pub design: DesignSpec,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
}

impl ScenarioConfig {
    /// The canned scenario catalog. Sweep scenarios use K = 3 profiles and
    /// J = N/5 items; the fixed-design pair uses a 16×10 two-profile
    /// layout with one flat and one stepped profile.
    pub fn canned(id: &str) -> Result<Self> {
        let tenths = |hi: usize| (1..=hi).map(|i| i as f64 / 10.0).collect::<Vec<_>>();
        let fifths = |hi: usize| (1..=hi).map(|i| i as f64 / 5.0).collect::<Vec<_>>();
        let ones = |hi: usize| (1..=hi).map(|i| i as f64).collect::<Vec<_>>();
        let thousands: Vec<usize> = (1..=5).map(|i| i * 1000).collect();
        let three_hundreds: Vec<usize> = (1..=10).map(|i| i * 300).collect();

        let (dist, design) = match id {
            "sim1a" => (
                DistributionSpec::Bernoulli,
                DesignSpec::RhoSweep {
                    n: 500,
                    k: 3,
                    j: None,
                    grid: tenths(10),
                },
            ),
            "sim1b" => (
                DistributionSpec::Bernoulli,
                DesignSpec::NSweep {
                    rho: 0.1,
                    k: 3,
                    j: None,
                    grid: thousands.clone(),
                },
            ),
            "sim2a" => (
                DistributionSpec::Binomial { m: 5 },
                DesignSpec::RhoSweep {
                    n: 500,
                    k: 3,
                    j: None,
                    grid: fifths(10),
                },
            ),
            "sim2b" => (
                DistributionSpec::Binomial { m: 5 },
                DesignSpec::NSweep {
                    rho: 0.1,
                    k: 3,
                    j: None,
                    grid: thousands.clone(),
                },
            ),
            "sim3a" => (
                DistributionSpec::Poisson,
                DesignSpec::RhoSweep {
                    n: 500,
                    k: 3,
                    j: None,
                    grid: fifths(10),
                },
            ),
            "sim3b" => (
                DistributionSpec::Poisson,
                DesignSpec::NSweep {
                    rho: 0.1,
                    k: 3,
                    j: None,
                    grid: thousands.clone(),
                },
            ),
            "sim4a" => (
                DistributionSpec::Normal { sigma2: 2.0 },
                DesignSpec::RhoSweep {
                    n: 500,
                    k: 3,
                    j: None,
                    grid: fifths(10),
                },
            ),
            "sim4b" => (
                DistributionSpec::Normal { sigma2: 2.0 },
                DesignSpec::NSweep {
                    rho: 0.5,
                    k: 3,
                    j: None,
                    grid: thousands.clone(),
                },
            ),
            "sim5a" => (
                DistributionSpec::Exponential,
                DesignSpec::RhoSweep {
                    n: 300,
                    k: 3,
                    j: None,
                    grid: ones(20),
                },
            ),
            "sim5b" => (
                DistributionSpec::Exponential,
                DesignSpec::NSweep {
                    rho: 1.0,
                    k: 3,
                    j: None,
                    grid: three_hundreds.clone(),
                },
            ),
            "sim6a" => (
                DistributionSpec::Uniform,
                DesignSpec::RhoSweep {
                    n: 120,
                    k: 3,
                    j: None,
                    grid: ones(20),
                },
            ),
            "sim6b" => (
                DistributionSpec::Uniform,
                DesignSpec::NSweep {
                    rho: 1.0,
                    k: 3,
                    j: None,
                    grid: three_hundreds,
                },
            ),
            "sim7a" => (
                DistributionSpec::Signed,
                DesignSpec::RhoSweep {
                    n: 500,
                    k: 3,
                    j: None,
                    grid: tenths(10),
                },
            ),
            "sim7b" => (
                DistributionSpec::Signed,
                DesignSpec::NSweep {
                    rho: 0.2,
                    k: 3,
                    j: None,
                    grid: thousands,
                },
            ),
            "sim8a" => (
                DistributionSpec::Normal { sigma2: 1.0 },
                fixed_step_design(),
            ),
            "sim8b" => (DistributionSpec::Poisson, fixed_step_design()),
            other => {
                return Err(Error::InvalidConfig {
                    context: format!("unknown scenario id '{other}'"),
                })
            }
        };
        Ok(Self {
            id: id.to_string(),
            dist,
            design,
            replicates: default_replicates(),
            master_seed: 1729,
            methods: default_methods(),
        })
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_master_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_methods(mut self, methods: Vec<Method>) -> Self {
        self.methods = methods;
        self
    }

    /// Overrides the subject count of a rho sweep (used for scaled-down
    /// trend runs); errors for other design kinds.
    pub fn with_n(mut self, n: usize) -> Result<Self> {
        match &mut self.design {
            DesignSpec::RhoSweep { n: slot, .. } => {
                *slot = n;
                Ok(self)
            }
            _ => Err(Error::InvalidConfig {
                context: "subject-count override only applies to rho sweeps".to_string(),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidConfig {
                context: "scenario id must be non-empty".to_string(),
            });
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig {
                context: "replicates must be >= 1".to_string(),
            });
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig {
                context: "at least one method must be selected".to_string(),
            });
        }
        match &self.design {
            DesignSpec::RhoSweep { n, k, j, grid } => {
                validate_grid_f64(grid)?;
                for &rho in grid {
                    self.dist.validate_rho(rho)?;
                }
                validate_sizes(*n, j.unwrap_or(n / 5), *k)?;
            }
            DesignSpec::NSweep { rho, k, j, grid } => {
                if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidConfig {
                        context: "grid must be non-empty and strictly increasing".to_string(),
                    });
                }
                self.dist.validate_rho(*rho)?;
                for &n in grid {
                    validate_sizes(n, j.unwrap_or(n / 5), *k)?;
                }
            }
            DesignSpec::Fixed { labels, theta_rows } => {
                let theta = fixed_theta(theta_rows)?;
                let k = theta.ncols();
                fixed_assignment(labels, k)?;
                validate_sizes(labels.len(), theta.nrows(), k)?;
            }
        }
        Ok(())
    }

    /// The concrete grid the engine will run.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        match &self.design {
            DesignSpec::RhoSweep { n, k, j, grid } => grid
                .iter()
                .enumerate()
                .map(|(index, &rho)| GridPoint {
                    index,
                    value: rho,
                    n: *n,
                    j: j.unwrap_or(n / 5),
                    k: *k,
                    rho,
                })
                .collect(),
            DesignSpec::NSweep { rho, k, j, grid } => grid
                .iter()
                .enumerate()
                .map(|(index, &n)| GridPoint {
                    index,
                    value: n as f64,
                    n,
                    j: j.unwrap_or(n / 5),
                    k: *k,
                    rho: *rho,
                })
                .collect(),
            DesignSpec::Fixed { labels, theta_rows } => vec![GridPoint {
                index: 0,
                value: 0.0,
                n: labels.len(),
                j: theta_rows.len(),
                k: theta_rows.first().map_or(0, Vec::len),
                rho: 0.0,
            }],
        }
    }

    pub fn grid_var(&self) -> &'static str {
        match self.design {
            DesignSpec::RhoSweep { .. } => "rho",
            DesignSpec::NSweep { .. } => "n",
            DesignSpec::Fixed { .. } => "fixed",
        }
    }
}

fn fixed_step_design() -> DesignSpec {
    let mut labels = vec![1usize; 8];
    labels.extend(vec![2usize; 8]);
    let theta_rows = (1..=10)
        .map(|j| vec![100.0, 110.0 - 10.0 * j as f64])
        .collect();
    DesignSpec::Fixed { labels, theta_rows }
}

fn validate_grid_f64(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig {
            context: "grid must be non-empty and strictly increasing".to_string(),
        });
    }
    Ok(())
}

fn validate_sizes(n: usize, j: usize, k: usize) -> Result<()> {
    if k == 0 || n < k || j < k {
        return Err(Error::InvalidConfig {
            context: format!("need n >= k >= 1 and j >= k, got n={n}, j={j}, k={k}"),
        });
    }
    Ok(())
}

fn fixed_theta(theta_rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let j = theta_rows.len();
    let k = theta_rows.first().map_or(0, Vec::len);
    if j == 0 || k == 0 || theta_rows.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidConfig {
            context: "theta_rows must be a non-empty rectangular J×K table".to_string(),
        });
    }
    let mut theta = Array2::zeros((j, k));
    for (row, values) in theta_rows.iter().enumerate() {
        for (col, &x) in values.iter().enumerate() {
            theta[(row, col)] = x;
        }
    }
    Ok(theta)
}

fn fixed_assignment(labels: &[usize], k: usize) -> Result<ClassAssignment> {
    let zero_based: Vec<usize> = labels
        .iter()
        .map(|&l| {
            l.checked_sub(1).ok_or(Error::InvalidConfig {
                context: "fixed-design labels are 1-based".to_string(),
            })
        })
        .collect::<Result<_>>()?;
    ClassAssignment::from_labels(zero_based, k)
}

/// One resolved grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    /// Swept value as reported (rho, n, or 0 for fixed designs).
    pub value: f64,
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub rho: f64,
}

/// Per-metric mean or standard deviation block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub clustering_error: f64,
    pub hamming_error: f64,
    pub nmi: f64,
    pub ari: f64,
    pub rel_l1: f64,
    pub rel_l2: f64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: String,
    pub method: Method,
    pub grid_var: String,
    pub grid_value: f64,
    pub n: usize,
    pub j: usize,
    pub k: usize,
    /// Successful replicates feeding the means.
    pub replicates: usize,
    pub failures: usize,
    pub mean: MetricSummary,
    pub std: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub grid_index: usize,
    pub grid_value: f64,
    pub n: usize,
    pub j: usize,
    pub replicate: usize,
    pub method: Method,
    pub metrics: MetricVector,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub grid_index: usize,
    pub grid_value: f64,
    pub replicate: usize,
    pub method: Method,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub master_seed: u64,
    pub config: ScenarioConfig,
    pub notes: Vec<String>,
}

/// Full scenario outcome: per-point aggregates plus the per-replicate rows
/// they were reduced from, so trends can be re-tested without re-running.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub provenance: Provenance,
    pub aggregates: Vec<AggregateRow>,
    pub replicates: Vec<ReplicateRow>,
    pub failures: Vec<FailureRecord>,
}

struct ReplicateOutcome {
    method: Method,
    result: std::result::Result<(MetricVector, f64), String>,
}

/// Runs every grid point × replicate × method and aggregates the results.
/// Replicates execute in the ambient rayon pool; the reduction is ordered
/// by (grid index, replicate index), so output does not depend on the
/// schedule.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let points = config.grid_points();
    let mut notes = Vec::new();
    for point in &points {
        let derived_j = matches!(
            config.design,
            DesignSpec::RhoSweep { j: None, .. } | DesignSpec::NSweep { j: None, .. }
        );
        if derived_j && point.n % 5 != 0 {
            notes.push(format!(
                "grid point {}: item count rounded down to j = {} (n = {} not divisible by 5)",
                point.index, point.j, point.n
            ));
        }
    }

    let tasks: Vec<(usize, usize)> = points
        .iter()
        .map(|p| p.index)
        .flat_map(|pi| (0..config.replicates).map(move |rep| (pi, rep)))
        .collect();
    let outcomes: Vec<Vec<ReplicateOutcome>> = tasks
        .par_iter()
        .map(|&(point_index, replicate)| run_replicate(config, &points[point_index], replicate))
        .collect();

    let mut replicate_rows = Vec::new();
    let mut failures = Vec::new();
    for (&(point_index, replicate), methods) in tasks.iter().zip(outcomes) {
        let point = &points[point_index];
        for outcome in methods {
            match outcome.result {
                Ok((metrics, elapsed_secs)) => replicate_rows.push(ReplicateRow {
                    grid_index: point.index,
                    grid_value: point.value,
                    n: point.n,
                    j: point.j,
                    replicate,
                    method: outcome.method,
                    metrics,
                    elapsed_secs,
                }),
                Err(message) => failures.push(FailureRecord {
                    grid_index: point.index,
                    grid_value: point.value,
                    replicate,
                    method: outcome.method,
                    message,
                }),
            }
        }
    }

    let mut aggregates = Vec::new();
    for point in &points {
        for &method in &config.methods {
            let rows: Vec<&ReplicateRow> = replicate_rows
                .iter()
                .filter(|row| row.grid_index == point.index && row.method == method)
                .collect();
            let failed = failures
                .iter()
                .filter(|f| f.grid_index == point.index && f.method == method)
                .count();
            let (mean, std) = summarize(&rows);
            aggregates.push(AggregateRow {
                scenario: config.id.clone(),
                method,
                grid_var: config.grid_var().to_string(),
                grid_value: point.value,
                n: point.n,
                j: point.j,
                k: point.k,
                replicates: rows.len(),
                failures: failed,
                mean,
                std,
            });
        }
    }

    Ok(ScenarioReport {
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.master_seed,
            config: config.clone(),
            notes,
        },
        aggregates,
        replicates: replicate_rows,
        failures,
    })
}

fn run_replicate(
    config: &ScenarioConfig,
    point: &GridPoint,
    replicate: usize,
) -> Vec<ReplicateOutcome> {
    let handle = RngHandle::new(derive_seed(config.master_seed, replicate as u64));
    let generated = generate_instance(config, point, &handle);
    let (truth, params, responses) = match generated {
        Ok(parts) => parts,
        Err(err) => {
            let message = err.to_string();
            return config
                .methods
                .iter()
                .map(|&method| ReplicateOutcome {
                    method,
                    result: Err(message.clone()),
                })
                .collect();
        }
    };

    config
        .methods
        .iter()
        .map(|&method| {
            let stream = match method {
                Method::Sck => STREAM_SCK,
                Method::Rmk => STREAM_RMK,
            };
            let mut rng = handle.derive(stream);
            let fitted = match method {
                Method::Sck => sck(&responses, point.k, &mut rng),
                Method::Rmk => rmk(&responses, point.k, &mut rng),
            };
            let result = fitted
                .and_then(|estimate| {
                    evaluate(
                        &truth,
                        &estimate.assignment,
                        params.theta().view(),
                        estimate.theta_hat.view(),
                    )
                    .map(|metrics| (metrics, estimate.elapsed_secs))
                })
                .map_err(|err| err.to_string());
            ReplicateOutcome { method, result }
        })
        .collect()
}

type Instance = (ClassAssignment, ItemParams, crate::model::ResponseMatrix);

fn generate_instance(
    config: &ScenarioConfig,
    point: &GridPoint,
    handle: &RngHandle,
) -> Result<Instance> {
    let mut data_rng = handle.derive(STREAM_DATA);
    let (truth, params) = match &config.design {
        DesignSpec::Fixed { labels, theta_rows } => {
            let theta = fixed_theta(theta_rows)?;
            (
                fixed_assignment(labels, theta.ncols())?,
                ItemParams::new(theta)?,
            )
        }
        _ => {
            let truth = sample_classes(point.n, point.k, &mut data_rng)?;
            let params =
                sample_item_params(&config.dist, point.j, point.k, point.rho, &mut data_rng)?;
            (truth, params)
        }
    };
    let r0 = population_matrix(&truth, &params)?;
    let responses = sample_responses(&r0, &config.dist, &mut data_rng)?;
    Ok((truth, params, responses))
}

fn summarize(rows: &[&ReplicateRow]) -> (MetricSummary, MetricSummary) {
    let extract = |row: &ReplicateRow| {
        [
            row.metrics.clustering_error,
            row.metrics.hamming_error,
            row.metrics.nmi,
            row.metrics.ari,
            row.metrics.rel_l1,
            row.metrics.rel_l2,
            row.elapsed_secs,
        ]
    };
    let count = rows.len();
    let mut mean = [0.0f64; 7];
    if count > 0 {
        for row in rows {
            for (slot, value) in mean.iter_mut().zip(extract(row)) {
                *slot += value;
            }
        }
        for slot in &mut mean {
            *slot /= count as f64;
        }
    }
    let mut std = [0.0f64; 7];
    if count > 1 {
        for row in rows {
            for ((slot, value), center) in std.iter_mut().zip(extract(row)).zip(mean) {
                let d = value - center;
                *slot += d * d;
            }
        }
        for slot in &mut std {
            *slot = (*slot / (count - 1) as f64).sqrt();
        }
    }
    let pack = |v: [f64; 7]| MetricSummary {
        clustering_error: v[0],
        hamming_error: v[1],
        nmi: v[2],
        ari: v[3],
        rel_l1: v[4],
        rel_l2: v[5],
        elapsed_secs: v[6],
    };
    (pack(mean), pack(std))
}
