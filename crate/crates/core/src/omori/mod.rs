//! Aftershock counting and Omori power-law relaxation.

mod count;
mod fit;
mod model;
mod sweep;

pub use count::{count_aftershocks, CountCurve};
pub use fit::{fit_cumulative, fit_omori, FitError, FitOptions, OmoriFit};
pub use model::{
    linear_limit_slope, omori_cumulative, omori_rate, OmoriParams, LOG_BRANCH_EPS, SERIES_GUARD,
};
pub use sweep::{threshold_sweep, SweepFlag, SweepRow, SweepTable};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OmoriError {
    #[error("tau must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("K must be positive and finite, got {0}")]
    InvalidK(f64),
    #[error("p must be finite, got {0}")]
    InvalidP(f64),
    #[error("t must be non-negative and finite, got {0}")]
    InvalidTime(f64),
    #[error("threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("sigma must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("shock impact window is empty")]
    EmptyWindow,
    #[error("threshold list is empty")]
    NoThresholds,
    #[error("thresholds must be strictly ascending")]
    ThresholdsNotAscending,
    #[error(transparent)]
    Fit(#[from] FitError),
}
