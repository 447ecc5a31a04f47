//! Harness-level behavior: canned grids, report round trips, schedule
//! independence, and the real-data analysis path.

mod common;

use std::io::Write;

use wlcm::generators::{sample_classes, sample_item_params, sample_responses, RngHandle};
use wlcm::harness::{
    aggregate_csv, analyze_dataset, emit_report, load_response_csv, parse_col_spec, replicate_csv,
    replicates_path, run_scenario, CsvSchema, DesignSpec, KChoice, ReportFormat, ScenarioConfig,
    ScenarioReport,
};
use wlcm::metrics::clustering_error;
use wlcm::model::{population_matrix, DistributionSpec};

fn rho_grid(config: &ScenarioConfig) -> (usize, Option<usize>, Vec<f64>) {
    match &config.design {
        DesignSpec::RhoSweep { n, j, grid, .. } => (*n, *j, grid.clone()),
        other => panic!("expected rho sweep, got {other:?}"),
    }
}

fn n_grid(config: &ScenarioConfig) -> (f64, Vec<usize>) {
    match &config.design {
        DesignSpec::NSweep { rho, grid, .. } => (*rho, grid.clone()),
        other => panic!("expected n sweep, got {other:?}"),
    }
}

#[test]
fn canned_grids_match_published_settings() {
    let (n, j, grid) = rho_grid(&ScenarioConfig::canned("sim1a").unwrap());
    assert_eq!((n, j), (500, None));
    assert_eq!(grid, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);

    let config = ScenarioConfig::canned("sim2a").unwrap();
    assert_eq!(config.dist, DistributionSpec::Binomial { m: 5 });
    let (n, _, grid) = rho_grid(&config);
    assert_eq!(n, 500);
    assert_eq!(grid, vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0]);

    let config = ScenarioConfig::canned("sim4a").unwrap();
    assert_eq!(config.dist, DistributionSpec::Normal { sigma2: 2.0 });
    let (_, _, grid) = rho_grid(&config);
    assert_eq!(grid.len(), 10);
    assert_eq!((grid[0], grid[9]), (0.2, 2.0));

    let (n, _, grid) = rho_grid(&ScenarioConfig::canned("sim5a").unwrap());
    assert_eq!(n, 300);
    assert_eq!(grid, (1..=20).map(f64::from).collect::<Vec<_>>());

    let (n, _, grid) = rho_grid(&ScenarioConfig::canned("sim6a").unwrap());
    assert_eq!(n, 120);
    assert_eq!(grid.len(), 20);

    let (rho, grid) = n_grid(&ScenarioConfig::canned("sim7b").unwrap());
    assert_eq!(rho, 0.2);
    assert_eq!(grid, vec![1000, 2000, 3000, 4000, 5000]);

    let (rho, grid) = n_grid(&ScenarioConfig::canned("sim5b").unwrap());
    assert_eq!(rho, 1.0);
    assert_eq!(grid, (1..=10).map(|i| i * 300).collect::<Vec<_>>());

    for id in ["sim1a", "sim2a", "sim3a", "sim4a", "sim7a"] {
        let config = ScenarioConfig::canned(id).unwrap();
        assert_eq!(config.replicates, 50);
        let (n, j, _) = rho_grid(&config);
        assert_eq!(j.unwrap_or(n / 5), n / 5);
    }
}

#[test]
fn csv_emission_round_trips_bit_exactly() {
    let config = ScenarioConfig::canned("sim8b")
        .unwrap()
        .with_replicates(3)
        .with_master_seed(5);
    let report = run_scenario(&config).unwrap();

    let aggregate = aggregate_csv(&report).unwrap();
    let mut reader = csv::Reader::from_reader(aggregate.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mean_col = header.iter().position(|h| h == "mean_rel_l2").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), report.aggregates.len());
    for (record, row) in rows.iter().zip(&report.aggregates) {
        let parsed: f64 = record.get(mean_col).unwrap().parse().unwrap();
        assert_eq!(parsed.to_bits(), row.mean.rel_l2.to_bits());
        assert_eq!(record.get(1).unwrap(), row.method.to_string());
    }

    let per_replicate = replicate_csv(&report).unwrap();
    let mut reader = csv::Reader::from_reader(per_replicate.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), report.replicates.len());
    for (record, row) in rows.iter().zip(&report.replicates) {
        let ce: f64 = record.get(7).unwrap().parse().unwrap();
        assert_eq!(ce.to_bits(), row.metrics.clustering_error.to_bits());
    }
}

#[test]
fn emitted_files_exist_and_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = ScenarioConfig::canned("sim8a")
        .unwrap()
        .with_replicates(2)
        .with_master_seed(9);
    let report = run_scenario(&config).unwrap();

    let json_path = dir.path().join("report.json");
    emit_report(&report, ReportFormat::Json, &json_path).unwrap();
    let text = std::fs::read_to_string(&json_path).unwrap();
    let back: ScenarioReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.provenance.master_seed, 9);

    let csv_path = dir.path().join("report.csv");
    emit_report(&report, ReportFormat::Csv, &csv_path).unwrap();
    assert!(csv_path.exists());
    assert!(replicates_path(&csv_path).exists());

    // Table layout: one aggregate row per method with all six criteria.
    let table = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = table.lines();
    let header = lines.next().unwrap();
    for metric in [
        "clustering_error",
        "hamming_error",
        "nmi",
        "ari",
        "rel_l1",
        "rel_l2",
    ] {
        assert!(
            header.contains(&format!("mean_{metric}")),
            "missing {metric}"
        );
    }
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 2);
    assert!(body.iter().any(|l| l.contains("SCK")));
    assert!(body.iter().any(|l| l.contains("RMK")));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let config = ScenarioConfig::canned("sim1a")
        .unwrap()
        .with_n(60)
        .unwrap()
        .with_replicates(4)
        .with_master_seed(21);
    let run_with = |threads: usize| -> ScenarioReport {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let mut report = pool.install(|| run_scenario(&config)).unwrap();
        // Wall time is the one legitimately non-deterministic field.
        for row in &mut report.replicates {
            row.elapsed_secs = 0.0;
        }
        for row in &mut report.aggregates {
            row.mean.elapsed_secs = 0.0;
            row.std.elapsed_secs = 0.0;
        }
        report
    };
    let single = run_with(1);
    let parallel = run_with(4);
    assert_eq!(single, parallel);
    assert_eq!(
        serde_json::to_string(&single).unwrap(),
        serde_json::to_string(&parallel).unwrap()
    );
}

#[test]
fn analysis_recovers_planted_structure_from_csv() {
    // Synthesize a Poisson response table with three well-separated
    // profiles, write it as CSV, and run the full ingestion + fit path.
    let mut rng = RngHandle::new(314);
    let truth = sample_classes(500, 3, &mut rng).unwrap();
    let theta =
        ndarray::Array2::from_shape_fn((100, 3), |_| 20.0 + 20.0 * rand::Rng::gen::<f64>(&mut rng));
    let params = wlcm::model::ItemParams::new(theta).unwrap();
    let r0 = population_matrix(&truth, &params).unwrap();
    let responses = sample_responses(&r0, &DistributionSpec::Poisson, &mut rng).unwrap();

    let mut file = tempfile::NamedTempFile::new().unwrap();
    let header: Vec<String> = (1..=100).map(|j| format!("q{j}")).collect();
    writeln!(file, "{},group", header.join(",")).unwrap();
    for i in 0..500 {
        let row: Vec<String> = (0..100)
            .map(|j| format!("{}", responses.values()[(i, j)]))
            .collect();
        writeln!(file, "{},g{}", row.join(","), truth.labels()[i] + 1).unwrap();
    }
    file.flush().unwrap();

    let schema = CsvSchema::new(parse_col_spec("1-100").unwrap())
        .with_covariates(wlcm::harness::parse_covariate_spec("group:cat").unwrap());
    let data = load_response_csv(file.path(), &schema).unwrap();
    assert_eq!(data.subjects(), 500);
    assert_eq!(data.items(), 100);

    let report =
        analyze_dataset(&data, KChoice::Auto { k_max: 8 }, &mut RngHandle::new(7)).unwrap();
    assert_eq!(report.k, 3);
    let selection = report.k_selection.as_ref().unwrap();
    assert_eq!(selection.k_hat, 3);
    assert_eq!(selection.scores.len(), 8);

    // Compare estimated labels against the planted ones.
    let estimated = wlcm::model::ClassAssignment::from_labels(
        report.labels.iter().map(|&l| l - 1).collect(),
        3,
    )
    .unwrap();
    assert_eq!(clustering_error(&truth, &estimated).unwrap(), 0.0);

    // Every profile is pure in the `group` covariate.
    for profile in &report.profiles {
        assert_eq!(profile.categorical_counts.len(), 1);
        assert_eq!(profile.categorical_counts[0].count, profile.size);
    }
}

#[test]
fn single_profile_analysis_uses_column_means() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "a,b").unwrap();
    for i in 0..10 {
        writeln!(file, "{},{}", i, 2 * i).unwrap();
    }
    file.flush().unwrap();
    let schema = CsvSchema::new(parse_col_spec("a,b").unwrap());
    let data = load_response_csv(file.path(), &schema).unwrap();
    let report = analyze_dataset(&data, KChoice::Fixed(1), &mut RngHandle::new(1)).unwrap();
    assert_eq!(report.k, 1);
    assert!(report.labels.iter().all(|&l| l == 1));
    // One profile: the item means are exactly the column means, and the
    // rank-1 estimate matches them up to truncation error.
    assert_eq!(report.profile_item_means[0][0], 4.5);
    assert_eq!(report.profile_item_means[1][0], 9.0);
}

#[test]
fn profile_means_match_estimate_on_population_input() {
    // Feeding the noiseless population matrix through the analysis makes
    // the per-profile item means agree with the estimated parameters.
    let mut rng = RngHandle::new(99);
    let truth = sample_classes(40, 2, &mut rng).unwrap();
    let params = sample_item_params(&DistributionSpec::Bernoulli, 10, 2, 0.9, &mut rng).unwrap();
    let r0 = population_matrix(&truth, &params).unwrap();

    let mut file = tempfile::NamedTempFile::new().unwrap();
    let header: Vec<String> = (1..=10).map(|j| format!("c{j}")).collect();
    writeln!(file, "{}", header.join(",")).unwrap();
    for i in 0..40 {
        let row: Vec<String> = (0..10)
            .map(|j| format!("{:.17}", r0.values()[(i, j)]))
            .collect();
        writeln!(file, "{}", row.join(",")).unwrap();
    }
    file.flush().unwrap();
    let schema = CsvSchema::new(parse_col_spec("1-10").unwrap());
    let data = load_response_csv(file.path(), &schema).unwrap();
    let report = analyze_dataset(&data, KChoice::Fixed(2), &mut RngHandle::new(2)).unwrap();
    assert!(report.max_mean_gap <= 1e-8, "gap {}", report.max_mean_gap);
}
