//! The three batch commands behind the CLI. Each reads a [`PipelineConfig`]
//! and writes its artifacts under `output_dir`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ConfigError, PipelineConfig, SimulateConfig};
use crate::ingest::{parse_file, validate_series, IngestError, ParseReport, ValidationReport};
use crate::omori::{threshold_sweep, OmoriError, SweepTable};
use crate::shockdetect::{detect_shocks, refine_shock, write_shocks_csv, Shock, ShockError};
use crate::simulate::{
    simulate_omori_events, synthetic_price_series, EventRecord, PlantedTruth, SimError, SimSpec,
};
use crate::volatility::{
    log_returns, realized_volatility, sample_sigma, Aggregation, VolatilityError, VolatilitySeries,
    Window,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Volatility(#[from] VolatilityError),
    #[error("shock detection failed: {0}")]
    Shock(#[from] ShockError),
    #[error(transparent)]
    Omori(#[from] OmoriError),
    #[error(transparent)]
    Simulate(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// 1 usage or config, 2 input or parse, 3 analysis-degenerate.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) | PipelineError::Usage(_) | PipelineError::Simulate(_) => 1,
            PipelineError::Ingest(_)
            | PipelineError::Volatility(_)
            | PipelineError::Output { .. } => 2,
            PipelineError::Shock(_) | PipelineError::Omori(_) => 3,
        }
    }
}

fn write_file<F>(path: &Path, body: F) -> Result<(), PipelineError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let wrap = |source| PipelineError::Output {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(wrap)?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    body(&mut out).and_then(|_| out.flush()).map_err(wrap)
}

fn input_path(config: &PipelineConfig) -> Result<&Path, PipelineError> {
    config
        .input
        .as_deref()
        .ok_or_else(|| PipelineError::Usage("no input file given".into()))
}

#[derive(Debug, Serialize)]
struct ValidationArtifact<'a> {
    input: String,
    parse: &'a ParseReport,
    validation: &'a ValidationReport,
}

#[derive(Debug)]
pub struct ValidateOutcome {
    pub parse: ParseReport,
    pub report: ValidationReport,
    pub report_path: PathBuf,
}

impl ValidateOutcome {
    /// Gaps are warnings; out-of-session, off-grid or non-calendar data are errors.
    pub fn exit_code(&self) -> u8 {
        if self.report.has_errors() {
            2
        } else {
            0
        }
    }
}

/// Parses the input and writes `validation.json`.
pub fn run_validate(config: &PipelineConfig) -> Result<ValidateOutcome, PipelineError> {
    config.validate()?;
    let input = input_path(config)?;
    let calendar = config.calendar()?;
    let parsed = parse_file(input, &calendar, config.format)?;
    let report = validate_series(&parsed.series, &calendar);
    let report_path = config.output_dir().join("validation.json");
    let artifact = ValidationArtifact {
        input: input.display().to_string(),
        parse: &parsed.report,
        validation: &report,
    };
    write_file(&report_path, |out| {
        serde_json::to_writer_pretty(&mut *out, &artifact)?;
        writeln!(out)
    })?;
    Ok(ValidateOutcome {
        parse: parsed.report,
        report,
        report_path,
    })
}

#[derive(Debug)]
pub struct AnalyzeOutcome {
    pub shocks: Vec<Shock>,
    pub sigma: f64,
    pub sweep: SweepTable,
    pub written: Vec<PathBuf>,
}

impl AnalyzeOutcome {
    /// 3 when nothing could be fitted, else 0.
    pub fn exit_code(&self) -> u8 {
        if self.shocks.is_empty() || self.sweep.all_degenerate() {
            3
        } else {
            0
        }
    }
}

/// File-name form of a window label: `2004-02-02 10:31` becomes `2004-02-02T1031`.
fn label_stem(label: &str) -> String {
    label.replace(' ', "T").replace(':', "")
}

/// Ingest, volatility, shock detection and threshold sweep. Writes
/// `volatility.csv`, `shocks.csv`, `sweep.csv` and one `curves/<t0>_<theta>.csv`
/// per sweep row.
pub fn run_analyze(config: &PipelineConfig) -> Result<AnalyzeOutcome, PipelineError> {
    config.validate()?;
    let input = input_path(config)?;
    let calendar = config.calendar()?;
    let parsed = parse_file(input, &calendar, config.format)?;
    let returns = log_returns(&parsed.series, config.exclude_overnight)?;

    let mut daily = realized_volatility(&returns, &Window::Day)?;
    daily.set_sigma_kind(config.sigma_kind);
    let daily_shocks = detect_shocks(&daily, &config.detect_params())?;

    let (vols, shocks): (VolatilitySeries, Vec<Shock>) = match config.aggregation {
        Aggregation::Daily => (daily, daily_shocks),
        Aggregation::Minutely => {
            let mut fine = realized_volatility(&returns, &Window::Minute(calendar.clone()))?;
            fine.set_sigma_kind(config.sigma_kind);
            let shocks = daily_shocks
                .iter()
                .filter_map(|s| refine_shock(s, &daily, &fine, config.duration))
                .collect();
            (fine, shocks)
        }
    };
    let sigma = sample_sigma(&vols, config.sigma_kind)?;

    let thetas = config.effective_thresholds();
    let mut sweep = SweepTable::default();
    for shock in &shocks {
        sweep.extend(threshold_sweep(&vols, shock, &thetas, sigma)?);
    }

    let dir = config.output_dir();
    let mut written = Vec::new();
    let path = dir.join("volatility.csv");
    write_file(&path, |out| vols.write_csv(out))?;
    written.push(path);
    let path = dir.join("shocks.csv");
    write_file(&path, |out| write_shocks_csv(&shocks, Some(sigma), out))?;
    written.push(path);
    let path = dir.join("sweep.csv");
    write_file(&path, |out| sweep.write_csv(out))?;
    written.push(path);
    for row in &sweep.rows {
        let name = format!(
            "{}_{}.csv",
            label_stem(&row.shock_label),
            row.theta_over_sigma
        );
        let path = dir.join("curves").join(name);
        write_file(&path, |out| row.curve.write_csv(row.fit.as_ref(), out))?;
        written.push(path);
    }

    Ok(AnalyzeOutcome {
        shocks,
        sigma,
        sweep,
        written,
    })
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum TruthSidecar<'a> {
    Omori {
        spec: &'a SimSpec,
        events: usize,
    },
    Planted {
        spec: &'a crate::simulate::PlantedSeriesSpec,
        rows: usize,
        truth: &'a PlantedTruth,
    },
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub data_path: PathBuf,
    pub truth_path: PathBuf,
    /// Events for an Omori stream, rows for a price series.
    pub records: usize,
}

/// Writes `synthetic.csv` and its ground truth `truth.json`. The config-level
/// `seed`, when set, replaces the seed inside the simulation spec.
pub fn run_simulate(config: &PipelineConfig) -> Result<SimulateOutcome, PipelineError> {
    config.validate()?;
    let sim = config
        .simulate
        .as_ref()
        .ok_or_else(|| PipelineError::Usage("config has no [simulate] section".into()))?;
    let dir = config.output_dir();
    let data_path = dir.join("synthetic.csv");
    let truth_path = dir.join("truth.json");

    let records = match sim {
        SimulateConfig::Omori(spec) => {
            let mut spec = *spec;
            if let Some(seed) = config.seed {
                spec.seed = seed;
            }
            let record = simulate_omori_events(&spec)?;
            write_file(&data_path, |out| match &record {
                EventRecord::Times(times) => {
                    writeln!(out, "time")?;
                    times.iter().try_for_each(|t| writeln!(out, "{t}"))
                }
                EventRecord::Counts(counts) => {
                    writeln!(out, "t,count")?;
                    counts
                        .iter()
                        .enumerate()
                        .try_for_each(|(i, c)| writeln!(out, "{},{c}", i + 1))
                }
            })?;
            let events = record.total();
            let sidecar = TruthSidecar::Omori {
                spec: &spec,
                events,
            };
            write_json(&truth_path, &sidecar)?;
            events
        }
        SimulateConfig::Planted(spec) => {
            let mut spec = spec.clone();
            if let Some(seed) = config.seed {
                spec.seed = seed;
            }
            let calendar = config.calendar()?;
            let planted = synthetic_price_series(&spec, &calendar)?;
            write_file(&data_path, |out| planted.series.write_csv(out))?;
            let rows = planted.series.len();
            let sidecar = TruthSidecar::Planted {
                spec: &spec,
                rows,
                truth: &planted.truth,
            };
            write_json(&truth_path, &sidecar)?;
            rows
        }
    };
    Ok(SimulateOutcome {
        data_path,
        truth_path,
        records,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    write_file(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)
    })
}
