//! Batch engine: canned scenarios, replicate orchestration, report
//! emission, and real-data ingestion/analysis.

pub mod dataset;
pub mod report;
pub mod scenario;

pub use dataset::{
    analyze_dataset, load_response_csv, parse_col_spec, parse_covariate_spec, AnalysisReport,
    Covariate, CovariateKind, CovariateSelector, CovariateValues, CsvSchema, Dataset, KChoice,
};
pub use report::{
    aggregate_csv, emit_report, fmt_float, replicate_csv, replicates_path, response_matrix_csv,
    truth_csv, ReportFormat,
};
pub use scenario::{
    run_scenario, AggregateRow, DesignSpec, GridPoint, MetricSummary, ReplicateRow, ScenarioConfig,
    ScenarioReport,
};
