//! Command-line front end: Monte-Carlo scenario runs, real-data fits, and
//! benchmark matrix generation.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/configuration error,
//! 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wlcm::generators::{
    sample_classes, sample_item_params, sample_responses, RngHandle, SimulationDesign,
};
use wlcm::harness::{
    analyze_dataset, emit_report, load_response_csv, parse_col_spec, parse_covariate_spec,
    response_matrix_csv, run_scenario, truth_csv, CsvSchema, KChoice, ReportFormat, ScenarioConfig,
};
use wlcm::model::{population_matrix, DistributionSpec};

#[derive(Parser)]
#[command(
    name = "wlcm",
    version,
    about = "Latent class analysis for weighted response matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a canned or user-defined Monte-Carlo scenario.
    Simulate(SimulateArgs),
    /// Fit the spectral estimator to a response CSV.
    Fit(FitArgs),
    /// Generate a benchmark response matrix with planted ground truth.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Canned scenario id (sim1a..sim7b, sim8a, sim8b) or a JSON config
    /// file path.
    #[arg(long)]
    scenario: String,
    /// Override the configured replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// csv (aggregate table plus a .replicates.csv sibling) or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads for replicate execution (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Response columns: names, 1-based indices, or ranges (e.g. "2-41").
    #[arg(long)]
    responses: String,
    /// Covariate columns, optionally suffixed :num or :cat.
    #[arg(long)]
    covariates: Option<String>,
    /// Profile count, or "auto" to select by residual norm.
    #[arg(long, default_value = "auto")]
    k: String,
    /// Largest candidate profile count for auto selection.
    #[arg(long, default_value_t = 15)]
    kmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the JSON analysis report.
    #[arg(long)]
    out: PathBuf,
    /// Extra missing-value markers (the empty cell is always missing).
    #[arg(long, default_value = "NA")]
    missing: String,
    /// Inclusive legal response range; rows outside it are dropped.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    range: Option<Vec<f64>>,
}

#[derive(Args)]
struct GenerateArgs {
    /// bernoulli | binomial | poisson | normal | exponential | uniform | signed
    #[arg(long)]
    dist: String,
    /// Trial count for the binomial kind.
    #[arg(long)]
    m: Option<u32>,
    /// Variance for the normal kind.
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    n: usize,
    /// Item count (default: n/5).
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Response matrix CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth CSV path (labels, item parameters, scaling).
    #[arg(long)]
    truth: PathBuf,
}

enum CliError {
    Usage(String),
    Lib(wlcm::Error),
}

impl From<wlcm::Error> for CliError {
    fn from(err: wlcm::Error) -> Self {
        CliError::Lib(err)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes, anything else is a
            // usage error.
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Generate(args) => generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Lib(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 3 } else { 2 })
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be >= 1".to_string()));
        }
        // Ignore the error if a pool already exists (repeated calls in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let mut config = load_scenario(&args.scenario)?;
    if let Some(replicates) = args.replicates {
        config = config.with_replicates(replicates);
    }
    if let Some(seed) = args.seed {
        config = config.with_master_seed(seed);
    }
    let format: ReportFormat = args.format.parse()?;
    let report = run_scenario(&config)?;
    emit_report(&report, format, &args.out)?;
    if !report.failures.is_empty() {
        eprintln!(
            "warning: {} replicate fit(s) failed and were skipped; see the report",
            report.failures.len()
        );
    }
    println!(
        "scenario {} complete: {} aggregate rows -> {}",
        config.id,
        report.aggregates.len(),
        args.out.display()
    );
    Ok(())
}

fn load_scenario(spec: &str) -> Result<ScenarioConfig, CliError> {
    if let Ok(config) = ScenarioConfig::canned(spec) {
        return Ok(config);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|source| {
        CliError::Lib(wlcm::Error::Io {
            path: path.display().to_string(),
            source,
        })
    })?;
    let config: ScenarioConfig = serde_json::from_str(&text).map_err(|err| {
        CliError::Lib(wlcm::Error::InvalidConfig {
            context: format!("{}: {err}", path.display()),
        })
    })?;
    Ok(config)
}

fn fit(args: FitArgs) -> Result<(), CliError> {
    let responses = parse_col_spec(&args.responses)?;
    let mut schema = CsvSchema::new(responses);
    if let Some(covariates) = &args.covariates {
        schema = schema.with_covariates(parse_covariate_spec(covariates)?);
    }
    let mut markers: Vec<String> = vec![String::new()];
    markers.extend(args.missing.split(',').map(str::to_string));
    schema = schema.with_missing_markers(markers);
    if let Some(range) = &args.range {
        schema = schema.with_response_range(range[0], range[1]);
    }

    let choice = match args.k.as_str() {
        "auto" => KChoice::Auto { k_max: args.kmax },
        value => KChoice::Fixed(value.parse().map_err(|_| {
            CliError::Usage(format!("--k expects an integer or 'auto', got '{value}'"))
        })?),
    };

    let data = load_response_csv(&args.input, &schema)?;
    let mut rng = RngHandle::new(args.seed);
    let report = analyze_dataset(&data, choice, &mut rng)?;
    let payload = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&args.out, payload).map_err(|source| {
        CliError::Lib(wlcm::Error::Io {
            path: args.out.display().to_string(),
            source,
        })
    })?;
    println!(
        "fitted {} subjects x {} items with k = {} ({} rows dropped) -> {}",
        report.n,
        report.j,
        report.k,
        report.dropped_rows,
        args.out.display()
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec = parse_distribution(&args.dist, args.m, args.sigma2)?;
    let j = args
        .j
        .unwrap_or_else(|| SimulationDesign::default_j(args.n));
    let design = SimulationDesign::new(args.n, args.k, j, spec, args.rho, 1, args.seed)?;
    let mut rng = RngHandle::new(design.master_seed);
    let truth = sample_classes(design.n, design.k, &mut rng)?;
    let params = sample_item_params(&design.spec, design.j, design.k, design.rho, &mut rng)?;
    let r0 = population_matrix(&truth, &params)?;
    let responses = sample_responses(&r0, &design.spec, &mut rng)?;

    write_text(&args.out, &response_matrix_csv(&responses))?;
    write_text(&args.truth, &truth_csv(&truth, &params))?;
    println!(
        "generated {} x {} {} matrix -> {} (truth -> {})",
        design.n,
        design.j,
        design.spec.name(),
        args.out.display(),
        args.truth.display()
    );
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| {
        CliError::Lib(wlcm::Error::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

fn parse_distribution(
    name: &str,
    m: Option<u32>,
    sigma2: Option<f64>,
) -> Result<DistributionSpec, CliError> {
    let spec = match name.to_ascii_lowercase().as_str() {
        "bernoulli" => DistributionSpec::Bernoulli,
        "binomial" => DistributionSpec::Binomial {
            m: m.ok_or_else(|| {
                CliError::Usage("--dist binomial requires --m".to_string())
            })?,
        },
        "poisson" => DistributionSpec::Poisson,
        "normal" => DistributionSpec::Normal {
            sigma2: sigma2.ok_or_else(|| {
                CliError::Usage("--dist normal requires --sigma2".to_string())
            })?,
        },
        "exponential" => DistributionSpec::Exponential,
        "uniform" => DistributionSpec::Uniform,
        "signed" => DistributionSpec::Signed,
        other => {
            return Err(CliError::Usage(format!(
                "unknown distribution '{other}' (expected bernoulli, binomial, poisson, normal, exponential, uniform, or signed)"
            )))
        }
    };
    if matches!(spec, DistributionSpec::Binomial { .. }) && sigma2.is_some() {
        return Err(CliError::Usage(
            "--sigma2 only applies to --dist normal".to_string(),
        ));
    }
    if matches!(spec, DistributionSpec::Normal { .. }) && m.is_some() {
        return Err(CliError::Usage(
            "--m only applies to --dist binomial".to_string(),
        ));
    }
    if m.is_some() && !matches!(spec, DistributionSpec::Binomial { .. }) {
        return Err(CliError::Usage(
            "--m only applies to --dist binomial".to_string(),
        ));
    }
    if sigma2.is_some() && !matches!(spec, DistributionSpec::Normal { .. }) {
        return Err(CliError::Usage(
            "--sigma2 only applies to --dist normal".to_string(),
        ));
    }
    Ok(spec)
}
