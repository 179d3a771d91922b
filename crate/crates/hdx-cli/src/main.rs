//! `hdx`: verification harness for random walks on weighted simplicial
//! complexes.
//!
//! Exit codes: 0 when every enabled check passes, 1 when any check fails,
//! 2 on usage or ingestion errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdx_core::report::{export_operator_csvs, parse_suites, profile_bounds_rows, run_analyze};
use hdx_core::spectral::measure_spectral_profile;
use hdx_core::{AnalyzeOptions, GenerateSpec, InstanceSource, SpectralProfile, Suite};

#[derive(Parser)]
#[command(
    name = "hdx",
    version,
    about = "Verify spectral and entropy contraction of up/down walks on weighted simplicial complexes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on an instance and emit a report.
    Analyze(AnalyzeCmd),
    /// Tabulate contraction bounds from a spectral profile.
    Bounds(BoundsCmd),
    /// Run only the entropy suite (the optimization-heavy checks).
    Entropy(EntropyCmd),
    /// Dump every walk operator of an instance as a CSV matrix.
    ExportOperators(ExportCmd),
}

#[derive(Args)]
struct InstanceArgs {
    /// JSON instance file.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Generator spec: complete:n=6,d=4 | random:n=7,d=3,seed=5[,sigma=1.5]
    /// | matroid-complete:m=4.
    #[arg(long, value_name = "SPEC", conflicts_with = "input")]
    generate: Option<GenerateSpec>,
}

impl InstanceArgs {
    fn source(&self) -> Result<InstanceSource, String> {
        match (&self.input, &self.generate) {
            (Some(path), None) => Ok(InstanceSource::File(path.clone())),
            (None, Some(spec)) => Ok(InstanceSource::Generated(spec.clone())),
            _ => Err("exactly one of --input or --generate is required".to_string()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// RNG seed; falls back to the HDX_SEED env var, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Optimizer restarts per estimate (default 64).
    #[arg(long)]
    restarts: Option<usize>,
    /// Sampled functions per identity or inequality check (default 1000).
    #[arg(long)]
    functions: Option<usize>,
    /// Optimizer iteration cap per restart (default 5000).
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Tolerance for exact algebraic identities (default 1e-10).
    #[arg(long)]
    eq_tol: Option<f64>,
    /// Tolerance for eigensolver-backed comparisons (default 1e-9).
    #[arg(long)]
    spec_tol: Option<f64>,
    /// Allowed shortfall of one-sided optimizer estimates (default 1e-6).
    #[arg(long)]
    opt_margin: Option<f64>,
    /// Optimizer gradient stopping tolerance (default 1e-10).
    #[arg(long)]
    opt_tol: Option<f64>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Write the report to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct AnalyzeCmd {
    /// "all" or a comma list of structure,walks,spectral,bounds,entropy.
    #[arg(long, default_value = "all")]
    checks: String,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct EntropyCmd {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BoundsCmd {
    /// Inline spectral profile as a JSON array, e.g. "[0,0,0]".
    #[arg(long, value_name = "JSON", conflicts_with_all = ["input", "generate"])]
    profile: Option<String>,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Largest level to tabulate (default: the profile's dimension).
    #[arg(long, value_name = "K")]
    k_max: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = BoundsFormat::Text)]
    format: BoundsFormat,
    /// Write the table to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportCmd {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Directory for the CSV files (created if missing).
    #[arg(long, value_name = "DIR")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsFormat {
    Text,
    Json,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Analyze(cmd) => {
            let suites = parse_suites(&cmd.checks).map_err(|e| e.to_string())?;
            let options = build_options(&cmd.run, suites)?;
            run_report(&cmd.run, options)
        }
        Command::Entropy(cmd) => {
            let options = build_options(&cmd.run, vec![Suite::Entropy])?;
            run_report(&cmd.run, options)
        }
        Command::Bounds(cmd) => run_bounds(&cmd),
        Command::ExportOperators(cmd) => run_export(&cmd),
    }
}

fn build_options(run: &RunArgs, suites: Vec<Suite>) -> Result<AnalyzeOptions, String> {
    let mut options = AnalyzeOptions {
        suites,
        ..AnalyzeOptions::default()
    };
    options.seed = resolve_seed(run.seed)?;
    if let Some(v) = run.restarts {
        options.restarts = v;
    }
    if let Some(v) = run.functions {
        options.functions = v;
    }
    if let Some(v) = run.max_iterations {
        options.max_iterations = v;
    }
    if let Some(v) = run.eq_tol {
        options.eq_tol = v;
    }
    if let Some(v) = run.spec_tol {
        options.spec_tol = v;
    }
    if let Some(v) = run.opt_margin {
        options.opt_margin = v;
    }
    if let Some(v) = run.opt_tol {
        options.opt_tol = v;
    }
    Ok(options)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("HDX_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| format!("HDX_SEED must be an unsigned integer, got {text:?}")),
        Err(std::env::VarError::NotPresent) => Ok(AnalyzeOptions::default().seed),
        Err(err) => Err(format!("HDX_SEED is unreadable: {err}")),
    }
}

fn run_report(run: &RunArgs, options: AnalyzeOptions) -> Result<i32, String> {
    if let Some(jobs) = run.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| format!("cannot size the worker pool: {e}"))?;
    }
    let source = run.instance.source()?;
    let report = run_analyze(&source, &options).map_err(|e| e.to_string())?;
    let rendered = match run.format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    emit(&rendered, run.output.as_deref())?;
    Ok(report.exit_code())
}

fn run_bounds(cmd: &BoundsCmd) -> Result<i32, String> {
    let profile = match &cmd.profile {
        Some(text) => parse_profile(text)?,
        None => {
            let source = cmd.instance.source().map_err(|_| {
                "bounds needs either --profile or an instance (--input/--generate)".to_string()
            })?;
            let complex = source.load().map_err(|e| e.to_string())?;
            let measurement = measure_spectral_profile(&complex).map_err(|e| e.to_string())?;
            measurement.profile.clamped_nonnegative()
        }
    };
    let report = profile_bounds_rows(&profile, cmd.k_max).map_err(|e| e.to_string())?;
    let rendered = match cmd.format {
        BoundsFormat::Text => report.to_text(),
        BoundsFormat::Json => report.to_json(),
    };
    emit(&rendered, cmd.output.as_deref())?;
    Ok(0)
}

fn parse_profile(text: &str) -> Result<SpectralProfile, String> {
    let values: Vec<f64> = serde_json::from_str(text)
        .map_err(|e| format!("--profile expects a JSON array of numbers: {e}"))?;
    if values.is_empty() {
        return Err("--profile needs at least one entry".to_string());
    }
    Ok(SpectralProfile::new(values))
}

fn run_export(cmd: &ExportCmd) -> Result<i32, String> {
    let source = cmd.instance.source()?;
    let complex = source.load().map_err(|e| e.to_string())?;
    let paths = export_operator_csvs(&complex, &cmd.output).map_err(|e| e.to_string())?;
    println!(
        "wrote {} operator files under {}",
        paths.len(),
        cmd.output.display()
    );
    Ok(0)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
