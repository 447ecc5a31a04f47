//! CSV ingestion and the end-to-end analysis of a real response matrix.
//!
//! Rows with missing or illegal values are dropped and logged rather than
//! imputed. Column selectors accept header names, 1-based indices, and
//! 1-based inclusive index ranges (`3-12`).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_k, sck, KSelection};
use crate::generators::RngHandle;
use crate::model::{profile_means, ResponseMatrix};

/// One entry of a column specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    /// 1-based column index.
    Index(usize),
    /// 1-based inclusive index range.
    Range(usize, usize),
}

impl ColumnSelector {
    fn parse(entry: &str) -> Result<Self> {
        let entry = entry.trim();
        if entry.is_empty() {
            return Err(Error::SchemaError {
                context: "empty column selector".to_string(),
            });
        }
        if let Ok(index) = entry.parse::<usize>() {
            return Ok(ColumnSelector::Index(index));
        }
        if let Some((lo, hi)) = entry.split_once('-') {
            if let (Ok(lo), Ok(hi)) = (lo.trim().parse::<usize>(), hi.trim().parse::<usize>()) {
                return Ok(ColumnSelector::Range(lo, hi));
            }
        }
        Ok(ColumnSelector::Name(entry.to_string()))
    }

    fn resolve(&self, header: &[String]) -> Result<Vec<usize>> {
        match self {
            ColumnSelector::Name(name) => header
                .iter()
                .position(|h| h == name)
                .map(|i| vec![i])
                .ok_or_else(|| Error::SchemaError {
                    context: format!("column '{name}' not found in header"),
                }),
            ColumnSelector::Index(index) => {
                if *index == 0 || *index > header.len() {
                    Err(Error::SchemaError {
                        context: format!("column index {index} outside 1..={}", header.len()),
                    })
                } else {
                    Ok(vec![index - 1])
                }
            }
            ColumnSelector::Range(lo, hi) => {
                if *lo == 0 || lo > hi || *hi > header.len() {
                    Err(Error::SchemaError {
                        context: format!("column range {lo}-{hi} outside 1..={}", header.len()),
                    })
                } else {
                    Ok((lo - 1..*hi).collect())
                }
            }
        }
    }
}

/// Parses a comma-separated column specification. Entries that look like
/// numbers are treated as 1-based indices, `a-b` as an index range, and
/// anything else as a header name.
pub fn parse_col_spec(spec: &str) -> Result<Vec<ColumnSelector>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(ColumnSelector::parse)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    Numeric,
    Categorical,
}

/// Covariate column with an optional declared kind; undeclared kinds are
/// detected from the data (numeric when every non-missing value parses).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovariateSelector {
    pub selector: ColumnSelector,
    pub kind: Option<CovariateKind>,
}

/// Parses a covariate specification: column entries with an optional
/// `:num` or `:cat` suffix, e.g. `age:num,gender:cat,3-5`.
pub fn parse_covariate_spec(spec: &str) -> Result<Vec<CovariateSelector>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|entry| {
            let entry = entry.trim();
            let (column, kind) = match entry.rsplit_once(':') {
                Some((column, "num")) => (column, Some(CovariateKind::Numeric)),
                Some((column, "cat")) => (column, Some(CovariateKind::Categorical)),
                _ => (entry, None),
            };
            Ok(CovariateSelector {
                selector: ColumnSelector::parse(column)?,
                kind,
            })
        })
        .collect()
}

/// How to read a response CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub response_columns: Vec<ColumnSelector>,
    pub covariate_columns: Vec<CovariateSelector>,
    /// Cell contents treated as missing (after trimming).
    pub missing_markers: Vec<String>,
    /// Inclusive legal range for responses; rows outside it are dropped.
    pub response_range: Option<(f64, f64)>,
}

impl CsvSchema {
    pub fn new(response_columns: Vec<ColumnSelector>) -> Self {
        Self {
            response_columns,
            covariate_columns: Vec::new(),
            missing_markers: vec![String::new(), "NA".to_string()],
            response_range: None,
        }
    }

    pub fn with_covariates(mut self, covariates: Vec<CovariateSelector>) -> Self {
        self.covariate_columns = covariates;
        self
    }

    pub fn with_response_range(mut self, lo: f64, hi: f64) -> Self {
        self.response_range = Some((lo, hi));
        self
    }

    pub fn with_missing_markers(mut self, markers: Vec<String>) -> Self {
        self.missing_markers = markers;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CovariateValues {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariate {
    pub name: String,
    pub values: CovariateValues,
}

/// A dropped input row (1-based data row, header excluded) and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    pub row: usize,
    pub reason: String,
}

/// A cleaned response matrix with covariates and the filter log.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub r: Array2<f64>,
    pub item_names: Vec<String>,
    pub covariates: Vec<Covariate>,
    pub dropped: Vec<DroppedRow>,
}

impl Dataset {
    pub fn subjects(&self) -> usize {
        self.r.nrows()
    }

    pub fn items(&self) -> usize {
        self.r.ncols()
    }
}

/// Loads and filters a response CSV per `schema`.
pub fn load_response_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.display().to_string(),
            source,
        })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.display().to_string(),
            source,
        })?
        .iter()
        .map(str::to_string)
        .collect();

    let mut response_cols = Vec::new();
    for selector in &schema.response_columns {
        response_cols.extend(selector.resolve(&header)?);
    }
    if response_cols.is_empty() {
        return Err(Error::SchemaError {
            context: "no response columns selected".to_string(),
        });
    }
    let mut covariate_cols = Vec::new();
    for covariate in &schema.covariate_columns {
        for col in covariate.selector.resolve(&header)? {
            covariate_cols.push((col, covariate.kind));
        }
    }

    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|source| Error::Csv {
        path: path.display().to_string(),
        source,
    })?;

    let is_missing = |cell: &str| schema.missing_markers.iter().any(|m| m == cell);

    // Detect undeclared covariate kinds from the non-missing values.
    let kinds: Vec<CovariateKind> = covariate_cols
        .iter()
        .map(|&(col, declared)| {
            declared.unwrap_or_else(|| {
                let numeric = records
                    .iter()
                    .filter_map(|rec| rec.get(col))
                    .filter(|cell| !is_missing(cell))
                    .all(|cell| cell.parse::<f64>().is_ok());
                if numeric {
                    CovariateKind::Numeric
                } else {
                    CovariateKind::Categorical
                }
            })
        })
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut covariate_rows: Vec<Vec<String>> = Vec::new();
    let mut dropped = Vec::new();
    'rows: for (idx, record) in records.iter().enumerate() {
        let row_number = idx + 1;
        let mut values = Vec::with_capacity(response_cols.len());
        for &col in &response_cols {
            let cell = record.get(col).unwrap_or("");
            if is_missing(cell) {
                dropped.push(DroppedRow {
                    row: row_number,
                    reason: format!("missing response in column '{}'", header[col]),
                });
                continue 'rows;
            }
            let value: f64 = match cell.parse() {
                Ok(v) => v,
                Err(_) => {
                    dropped.push(DroppedRow {
                        row: row_number,
                        reason: format!(
                            "unparseable response '{cell}' in column '{}'",
                            header[col]
                        ),
                    });
                    continue 'rows;
                }
            };
            if let Some((lo, hi)) = schema.response_range {
                if value < lo || value > hi {
                    dropped.push(DroppedRow {
                        row: row_number,
                        reason: format!(
                            "response {value} in column '{}' outside [{lo}, {hi}]",
                            header[col]
                        ),
                    });
                    continue 'rows;
                }
            }
            values.push(value);
        }
        let mut covariate_cells = Vec::with_capacity(covariate_cols.len());
        for (&(col, _), kind) in covariate_cols.iter().zip(&kinds) {
            let cell = record.get(col).unwrap_or("");
            if is_missing(cell) {
                dropped.push(DroppedRow {
                    row: row_number,
                    reason: format!("missing covariate in column '{}'", header[col]),
                });
                continue 'rows;
            }
            if *kind == CovariateKind::Numeric && cell.parse::<f64>().is_err() {
                dropped.push(DroppedRow {
                    row: row_number,
                    reason: format!(
                        "unparseable numeric covariate '{cell}' in column '{}'",
                        header[col]
                    ),
                });
                continue 'rows;
            }
            covariate_cells.push(cell.to_string());
        }
        rows.push(values);
        covariate_rows.push(covariate_cells);
    }

    if rows.is_empty() {
        return Err(Error::EmptyAfterFilter {
            dropped: dropped.len(),
        });
    }

    let n = rows.len();
    let j = response_cols.len();
    let mut r = Array2::zeros((n, j));
    for (i, row) in rows.iter().enumerate() {
        for (col, &value) in row.iter().enumerate() {
            r[(i, col)] = value;
        }
    }
    let covariates = covariate_cols
        .iter()
        .zip(&kinds)
        .enumerate()
        .map(|(slot, (&(col, _), kind))| {
            let name = header[col].clone();
            let values = match kind {
                CovariateKind::Numeric => CovariateValues::Numeric(
                    covariate_rows
                        .iter()
                        .map(|cells| cells[slot].parse::<f64>().expect("validated above"))
                        .collect(),
                ),
                CovariateKind::Categorical => CovariateValues::Categorical(
                    covariate_rows
                        .iter()
                        .map(|cells| cells[slot].clone())
                        .collect(),
                ),
            };
            Covariate { name, values }
        })
        .collect();

    Ok(Dataset {
        r,
        item_names: response_cols.iter().map(|&c| header[c].clone()).collect(),
        covariates,
        dropped,
    })
}

/// Profile count: fixed, or selected by the residual-norm rule up to
/// `k_max` (capped at min(N, J)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    Auto { k_max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub covariate: String,
    pub category: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericMean {
    pub covariate: String,
    pub mean: f64,
}

/// Mean of a numeric covariate within one category of a categorical one,
/// inside a profile (e.g. average age of male subjects in profile 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericMeanByCategory {
    pub covariate: String,
    pub group_by: String,
    pub category: String,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    /// 1-based profile number.
    pub profile: usize,
    pub size: usize,
    pub categorical_counts: Vec<CategoryCount>,
    pub numeric_means: Vec<NumericMean>,
    pub numeric_means_by_category: Vec<NumericMeanByCategory>,
}

/// Outcome of fitting a dataset: profile labels (1-based), estimated item
/// parameters, per-profile item means with their gap to the estimate, and
/// covariate summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub k_selection: Option<KSelection>,
    pub labels: Vec<usize>,
    pub theta_hat: Vec<Vec<f64>>,
    pub profile_item_means: Vec<Vec<f64>>,
    /// max |profile_item_means − theta_hat|.
    pub max_mean_gap: f64,
    pub item_names: Vec<String>,
    pub profiles: Vec<ProfileSummary>,
    pub dropped_rows: usize,
    pub elapsed_secs: f64,
}

/// Fits the spectral estimator to a dataset, optionally selecting the
/// profile count first, and summarizes covariates per estimated profile.
pub fn analyze_dataset(
    data: &Dataset,
    choice: KChoice,
    rng: &mut RngHandle,
) -> Result<AnalysisReport> {
    let start = Instant::now();
    let observed = ResponseMatrix::observed(data.r.clone());
    let limit = data.subjects().min(data.items());
    let (k, k_selection) = match choice {
        KChoice::Fixed(k) => {
            if k == 0 || k > limit {
                return Err(Error::DegenerateInput {
                    context: format!("k must lie in 1..={limit}, got {k}"),
                });
            }
            (k, None)
        }
        KChoice::Auto { k_max } => {
            if k_max == 0 {
                return Err(Error::DegenerateInput {
                    context: "k_max must be >= 1".to_string(),
                });
            }
            let mut selection_rng = rng.derive(0);
            let selection = estimate_k(&observed, k_max.min(limit), &mut selection_rng)?;
            (selection.k_hat, Some(selection))
        }
    };

    let mut fit_rng = rng.derive(1);
    let estimate = sck(&observed, k, &mut fit_rng)?;
    let item_means = profile_means(&observed, &estimate.assignment)?;
    let max_mean_gap = item_means
        .iter()
        .zip(estimate.theta_hat.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let profiles = summarize_profiles(data, estimate.assignment.labels(), k);
    let to_rows =
        |m: &Array2<f64>| -> Vec<Vec<f64>> { (0..m.nrows()).map(|r| m.row(r).to_vec()).collect() };

    Ok(AnalysisReport {
        n: data.subjects(),
        j: data.items(),
        k,
        k_selection,
        labels: estimate
            .assignment
            .labels()
            .iter()
            .map(|&l| l + 1)
            .collect(),
        theta_hat: to_rows(&estimate.theta_hat),
        profile_item_means: to_rows(&item_means),
        max_mean_gap,
        item_names: data.item_names.clone(),
        profiles,
        dropped_rows: data.dropped.len(),
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

fn summarize_profiles(data: &Dataset, labels: &[usize], k: usize) -> Vec<ProfileSummary> {
    (0..k)
        .map(|profile| {
            let members: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter_map(|(i, &l)| (l == profile).then_some(i))
                .collect();
            let mut categorical_counts = Vec::new();
            let mut numeric_means = Vec::new();
            let mut numeric_means_by_category = Vec::new();
            for covariate in &data.covariates {
                match &covariate.values {
                    CovariateValues::Categorical(values) => {
                        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                        for &i in &members {
                            *counts.entry(values[i].as_str()).or_insert(0) += 1;
                        }
                        for (category, count) in counts {
                            categorical_counts.push(CategoryCount {
                                covariate: covariate.name.clone(),
                                category: category.to_string(),
                                count,
                            });
                        }
                    }
                    CovariateValues::Numeric(values) => {
                        let total: f64 = members.iter().map(|&i| values[i]).sum();
                        numeric_means.push(NumericMean {
                            covariate: covariate.name.clone(),
                            mean: total / members.len() as f64,
                        });
                        for group in &data.covariates {
                            if let CovariateValues::Categorical(groups) = &group.values {
                                let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
                                for &i in &members {
                                    let entry = sums.entry(groups[i].as_str()).or_insert((0.0, 0));
                                    entry.0 += values[i];
                                    entry.1 += 1;
                                }
                                for (category, (sum, count)) in sums {
                                    numeric_means_by_category.push(NumericMeanByCategory {
                                        covariate: covariate.name.clone(),
                                        group_by: group.name.clone(),
                                        category: category.to_string(),
                                        mean: sum / count as f64,
                                    });
                                }
                            }
                        }
                    }
                }
            }
            ProfileSummary {
                profile: profile + 1,
                size: members.len(),
                categorical_counts,
                numeric_means,
                numeric_means_by_category,
            }
        })
        .collect()
}
