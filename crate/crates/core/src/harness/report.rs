//! Report serialization.
//!
//! CSV output holds the aggregate table at the requested path and the
//! per-replicate rows next to it under `<stem>.replicates.csv`; JSON holds
//! the whole report (aggregates, replicates, failures) plus provenance in
//! one file. Floats are printed with 17 significant digits so parsing them
//! back reproduces the exact bits.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::scenario::{MetricSummary, ScenarioReport};
use crate::model::{ClassAssignment, ItemParams, ResponseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidConfig {
                context: format!("unknown report format '{other}' (expected csv or json)"),
            }),
        }
    }
}

/// 17 significant digits: enough to round-trip any finite f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `report` to `path` in the requested format.
pub fn emit_report(report: &ScenarioReport, format: ReportFormat, path: &Path) -> Result<()> {
    if report.aggregates.is_empty() {
        return Err(Error::InvalidConfig {
            context: "refusing to emit an empty report".to_string(),
        });
    }
    match format {
        ReportFormat::Json => {
            let payload = serde_json::to_string_pretty(report).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            })?;
            write_text(path, &payload)
        }
        ReportFormat::Csv => {
            write_text(path, &aggregate_csv(report)?)?;
            write_text(&replicates_path(path), &replicate_csv(report)?)
        }
    }
}

/// Sibling path carrying the per-replicate rows of a CSV report.
pub fn replicates_path(path: &Path) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".to_string());
    path.with_file_name(format!("{stem}.replicates.csv"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

const METRIC_NAMES: [&str; 7] = [
    "clustering_error",
    "hamming_error",
    "nmi",
    "ari",
    "rel_l1",
    "rel_l2",
    "elapsed_secs",
];

fn summary_values(summary: &MetricSummary) -> [f64; 7] {
    [
        summary.clustering_error,
        summary.hamming_error,
        summary.nmi,
        summary.ari,
        summary.rel_l1,
        summary.rel_l2,
        summary.elapsed_secs,
    ]
}

/// The aggregate table: one row per grid point and method, means paired
/// with cross-replicate standard deviations in a fixed column order.
pub fn aggregate_csv(report: &ScenarioReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "scenario".to_string(),
        "method".to_string(),
        "grid_var".to_string(),
        "grid_value".to_string(),
        "n".to_string(),
        "j".to_string(),
        "k".to_string(),
        "replicates".to_string(),
        "failures".to_string(),
    ];
    for name in METRIC_NAMES {
        header.push(format!("mean_{name}"));
        header.push(format!("std_{name}"));
    }
    write_record(&mut writer, &header)?;
    for row in &report.aggregates {
        let mut record = vec![
            row.scenario.clone(),
            row.method.to_string(),
            row.grid_var.clone(),
            fmt_float(row.grid_value),
            row.n.to_string(),
            row.j.to_string(),
            row.k.to_string(),
            row.replicates.to_string(),
            row.failures.to_string(),
        ];
        for (mean, std) in summary_values(&row.mean)
            .into_iter()
            .zip(summary_values(&row.std))
        {
            record.push(fmt_float(mean));
            record.push(fmt_float(std));
        }
        write_record(&mut writer, &record)?;
    }
    finish(writer)
}

/// The per-replicate table backing the aggregates.
pub fn replicate_csv(report: &ScenarioReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "scenario".to_string(),
        "method".to_string(),
        "grid_index".to_string(),
        "grid_value".to_string(),
        "n".to_string(),
        "j".to_string(),
        "replicate".to_string(),
    ];
    header.extend(METRIC_NAMES.iter().map(|s| s.to_string()));
    write_record(&mut writer, &header)?;
    let scenario = &report.provenance.config.id;
    for row in &report.replicates {
        let record = vec![
            scenario.clone(),
            row.method.to_string(),
            row.grid_index.to_string(),
            fmt_float(row.grid_value),
            row.n.to_string(),
            row.j.to_string(),
            row.replicate.to_string(),
            fmt_float(row.metrics.clustering_error),
            fmt_float(row.metrics.hamming_error),
            fmt_float(row.metrics.nmi),
            fmt_float(row.metrics.ari),
            fmt_float(row.metrics.rel_l1),
            fmt_float(row.metrics.rel_l2),
            fmt_float(row.elapsed_secs),
        ];
        write_record(&mut writer, &record)?;
    }
    finish(writer)
}

fn write_record(writer: &mut csv::Writer<Vec<u8>>, record: &[String]) -> Result<()> {
    writer.write_record(record).map_err(|source| Error::Csv {
        path: "<in-memory report>".to_string(),
        source,
    })
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer.into_inner().map_err(|e| Error::Io {
        path: "<in-memory report>".to_string(),
        source: std::io::Error::other(e),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::Io {
        path: "<in-memory report>".to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}

/// Benchmark response matrix as CSV: header `item_1..item_J`, one row per
/// subject, floats printed round-trip exact.
pub fn response_matrix_csv(responses: &ResponseMatrix) -> String {
    let j = responses.items();
    let header: Vec<String> = (1..=j).map(|col| format!("item_{col}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in responses.values().rows() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Planted ground truth in long form, columns `record,row,col,value`:
/// `label` rows give each subject's 1-based profile, `theta` rows give the
/// item parameter matrix entry by entry (1-based item and profile), and the
/// single `rho` row gives the scaling parameter.
pub fn truth_csv(truth: &ClassAssignment, params: &ItemParams) -> String {
    let mut out = String::from("record,row,col,value\n");
    for (i, &label) in truth.labels().iter().enumerate() {
        out.push_str(&format!("label,{},,{}\n", i + 1, label + 1));
    }
    for ((item, profile), &value) in params.theta().indexed_iter() {
        out.push_str(&format!(
            "theta,{},{},{}\n",
            item + 1,
            profile + 1,
            fmt_float(value)
        ));
    }
    out.push_str(&format!("rho,,,{}\n", fmt_float(params.rho())));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            -4.37e17,
            0.0,
            1.0,
        ] {
            let text = fmt_float(x);
            let back: f64 = text.parse().unwrap();
            assert_eq!(x.to_bits(), back.to_bits(), "{text}");
        }
    }

    #[test]
    fn format_parsing() {
        assert_eq!(ReportFormat::from_str("CSV").unwrap(), ReportFormat::Csv);
        assert_eq!(ReportFormat::from_str("json").unwrap(), ReportFormat::Json);
        assert!(ReportFormat::from_str("yaml").is_err());
    }

    #[test]
    fn replicates_path_sits_next_to_report() {
        let path = Path::new("/tmp/out/report.csv");
        assert_eq!(
            replicates_path(path),
            Path::new("/tmp/out/report.replicates.csv")
        );
    }
}
