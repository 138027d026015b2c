//! Pipeline configuration, read from and written to TOML.
//!
//! Every key has a default, so an empty file (or no file at all) plus an input
//! path is a complete configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ingest::{parse_session, InputFormat, TradingCalendar};
use crate::shockdetect::{DetectParams, DurationConvention};
use crate::simulate::{PlantedSeriesSpec, SimSpec};
use crate::volatility::{Aggregation, SigmaKind};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub const DAILY_THRESHOLDS: [f64; 4] = [0.6, 0.7, 0.8, 0.9];
pub const MINUTELY_THRESHOLDS: [f64; 3] = [1.5, 1.75, 2.0];
pub const DEFAULT_OUTPUT_DIR: &str = "out";

fn default_sessions() -> Vec<String> {
    vec!["09:30-11:30".into(), "13:00-15:00".into()]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: InputFormat,
    #[serde(default = "default_true")]
    pub exclude_overnight: bool,
    #[serde(default)]
    pub sigma_kind: SigmaKind,
    #[serde(default = "default_aggregation")]
    pub aggregation: Aggregation,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_min_gap")]
    pub min_gap: usize,
    #[serde(default = "default_search_window")]
    pub search_window: usize,
    #[serde(default)]
    pub duration: DurationConvention,
    /// Threshold multiples of sigma; defaults depend on `aggregation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    /// Trading sessions as `HH:MM-HH:MM`.
    #[serde(default = "default_sessions")]
    pub sessions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Overrides the seed of the simulation spec when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
}

fn default_format() -> InputFormat {
    InputFormat::MinuteBars
}

fn default_aggregation() -> Aggregation {
    Aggregation::Daily
}

fn default_k() -> usize {
    DetectParams::default().k
}

fn default_min_gap() -> usize {
    DetectParams::default().min_gap
}

fn default_search_window() -> usize {
    DetectParams::default().search_window
}

/// What `simulate` produces: an Omori event stream or a planted price series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SimulateConfig {
    Omori(SimSpec),
    Planted(PlantedSeriesSpec),
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            format: default_format(),
            exclude_overnight: true,
            sigma_kind: SigmaKind::default(),
            aggregation: default_aggregation(),
            k: default_k(),
            min_gap: default_min_gap(),
            search_window: default_search_window(),
            duration: DurationConvention::default(),
            thresholds: None,
            sessions: default_sessions(),
            output_dir: None,
            seed: None,
            simulate: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.k == 0 || self.min_gap == 0 || self.search_window == 0 {
            return bad("k, min_gap and search_window must be positive");
        }
        if let Some(t) = &self.thresholds {
            if t.is_empty() {
                return bad("threshold list is empty");
            }
            if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return bad("thresholds must be positive");
            }
            if t.windows(2).any(|w| w[0] >= w[1]) {
                return bad("thresholds must be strictly ascending");
            }
        }
        self.calendar()?;
        Ok(())
    }

    pub fn calendar(&self) -> Result<TradingCalendar, ConfigError> {
        let sessions = self
            .sessions
            .iter()
            .map(|s| parse_session(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        TradingCalendar::new(sessions).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// `output_dir`, or `out` when unset.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn detect_params(&self) -> DetectParams {
        DetectParams {
            k: self.k,
            min_gap: self.min_gap,
            search_window: self.search_window,
            duration: self.duration,
        }
    }

    pub fn effective_thresholds(&self) -> Vec<f64> {
        match (&self.thresholds, self.aggregation) {
            (Some(t), _) => t.clone(),
            (None, Aggregation::Daily) => DAILY_THRESHOLDS.to_vec(),
            (None, Aggregation::Minutely) => MINUTELY_THRESHOLDS.to_vec(),
        }
    }
}
