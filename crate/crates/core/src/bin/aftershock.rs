use std::path::PathBuf;
use std::process::ExitCode;

use aftershock::config::PipelineConfig;
use aftershock::ingest::InputFormat;
use aftershock::pipeline::{run_analyze, run_simulate, run_validate, PipelineError};
use aftershock::volatility::{Aggregation, SigmaKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Aftershock analysis of high-frequency index data.
///
/// Settings come from an optional TOML config file; command-line flags
/// override it. Exit codes: 0 success, 1 usage or config error, 2 input
/// error, 3 nothing to fit (no shocks, or every fit degenerate).
#[derive(Debug, Parser)]
#[command(name = "aftershock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the input and write validation.json.
    Validate(Common),
    /// Detect main shocks and fit aftershock relaxation at each threshold.
    Analyze(AnalyzeArgs),
    /// Write a synthetic dataset and its ground truth.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Price file (`.gz` is decompressed).
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output directory; falls back to the config, then AFTERSHOCK_OUT_DIR, then `out`.
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    aggregation: Option<AggregationArg>,
    #[arg(long, value_enum)]
    sigma_kind: Option<SigmaArg>,
    /// Thresholds in sigma units, comma separated and ascending.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    min_gap: Option<usize>,
    #[arg(long)]
    search_window: Option<usize>,
    /// Keep returns spanning two trading days.
    #[arg(long)]
    include_overnight: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    MinuteBars,
    EventQuotes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregationArg {
    Daily,
    Minutely,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SigmaArg {
    Std,
    Mean,
}

const OUT_DIR_ENV: &str = "AFTERSHOCK_OUT_DIR";

fn load(common: &Common) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(input) = &common.input {
        cfg.input = Some(input.clone());
    }
    if let Some(f) = common.format {
        cfg.format = match f {
            FormatArg::MinuteBars => InputFormat::MinuteBars,
            FormatArg::EventQuotes => InputFormat::EventQuotes,
        };
    }
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = Some(dir.clone());
    } else if cfg.output_dir.is_none() {
        cfg.output_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    }
    Ok(cfg)
}

fn analyze_config(args: &AnalyzeArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = load(&args.common)?;
    if let Some(a) = args.aggregation {
        cfg.aggregation = match a {
            AggregationArg::Daily => Aggregation::Daily,
            AggregationArg::Minutely => Aggregation::Minutely,
        };
    }
    if let Some(s) = args.sigma_kind {
        cfg.sigma_kind = match s {
            SigmaArg::Std => SigmaKind::StandardDeviation,
            SigmaArg::Mean => SigmaKind::Mean,
        };
    }
    if let Some(t) = &args.thresholds {
        cfg.thresholds = Some(t.clone());
    }
    cfg.k = args.k.unwrap_or(cfg.k);
    cfg.min_gap = args.min_gap.unwrap_or(cfg.min_gap);
    cfg.search_window = args.search_window.unwrap_or(cfg.search_window);
    if args.include_overnight {
        cfg.exclude_overnight = false;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, PipelineError> {
    match cli.command {
        Command::Validate(common) => {
            let out = run_validate(&load(&common)?)?;
            let r = &out.report;
            eprintln!(
                "{} rows accepted, {} rejected; {} days, {} gaps; report: {}",
                out.parse.accepted,
                out.parse.rejected_out_of_session,
                r.day_count,
                r.gap_count,
                out.report_path.display()
            );
            Ok(out.exit_code())
        }
        Command::Analyze(args) => {
            let out = run_analyze(&analyze_config(&args)?)?;
            eprintln!(
                "sigma = {:.6e}; {} main shock(s); {} sweep row(s), {} degenerate",
                out.sigma,
                out.shocks.len(),
                out.sweep.rows.len(),
                out.sweep
                    .rows
                    .iter()
                    .filter(|r| r.flag.is_degenerate())
                    .count()
            );
            if out.shocks.is_empty() {
                eprintln!("no main shocks detected");
            } else if out.sweep.all_degenerate() {
                eprintln!("every threshold produced a degenerate curve");
            }
            Ok(out.exit_code())
        }
        Command::Simulate(args) => {
            let mut cfg = load(&args.common)?;
            if args.seed.is_some() {
                cfg.seed = args.seed;
            }
            let out = run_simulate(&cfg)?;
            eprintln!(
                "{} records written to {}; truth in {}",
                out.records,
                out.data_path.display(),
                out.truth_path.display()
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
