//! Log returns and realized volatility.
//!
//! A return is `ln I(t) - ln I(t - dt)` between consecutive observations; the
//! realized volatility of a window is the square root of the sum of squared
//! returns falling in it. Daily windows cover one trading day; minutely windows
//! cover one clock minute `(m - 1, m]` and are labelled by `m`.

use std::io::Write;

use chrono::{NaiveDate, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::ingest::{
    format_time, minute_of_day, time_from_minute, PriceSeries, TimeBasis, TradingCalendar,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VolatilityError {
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("non-positive price at observation {0}")]
    NonPositivePrice(usize),
    #[error("return series is empty")]
    NoReturns,
    #[error("need at least 2 volatility values, got {0}")]
    TooFewValues(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Return {
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    basis: TimeBasis,
    exclude_overnight: bool,
    returns: Vec<Return>,
    /// Every trading day of the source, including days with no returns.
    dates: Vec<NaiveDate>,
    /// First return index of each day in `dates`.
    day_starts: Vec<usize>,
    /// Last index level of each day.
    closes: Vec<f64>,
}

impl ReturnSeries {
    pub fn basis(&self) -> TimeBasis {
        self.basis
    }

    pub fn excludes_overnight(&self) -> bool {
        self.exclude_overnight
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn returns(&self) -> &[Return] {
        &self.returns
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.returns.iter().map(|r| r.value)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn day_returns(&self, d: usize) -> &[Return] {
        let start = self.day_starts[d];
        let end = self
            .day_starts
            .get(d + 1)
            .copied()
            .unwrap_or(self.returns.len());
        &self.returns[start..end]
    }

    pub fn day_closes(&self) -> &[f64] {
        &self.closes
    }
}

/// Computes consecutive log returns. With `exclude_overnight`, pairs that
/// straddle a day boundary are dropped; otherwise the overnight return is
/// attributed to the later day.
pub fn log_returns(
    series: &PriceSeries,
    exclude_overnight: bool,
) -> Result<ReturnSeries, VolatilityError> {
    let obs = series.observations();
    if obs.len() < 2 {
        return Err(VolatilityError::TooShort(obs.len()));
    }
    if let Some(i) = obs.iter().position(|o| o.level.is_nan() || o.level <= 0.0) {
        return Err(VolatilityError::NonPositivePrice(i));
    }

    let expected = if exclude_overnight {
        obs.len() - series.day_count()
    } else {
        obs.len() - 1
    };
    let mut returns = Vec::with_capacity(expected);
    let mut day_starts = Vec::with_capacity(series.day_count());
    let mut closes = Vec::with_capacity(series.day_count());
    for d in 0..series.day_count() {
        let range = series.day_range(d);
        day_starts.push(returns.len());
        closes.push(obs[range.end - 1].level);
        let first = if d == 0 || exclude_overnight {
            range.start + 1
        } else {
            range.start
        };
        for i in first..range.end {
            returns.push(Return {
                date: obs[i].date,
                time: obs[i].time,
                value: (obs[i].level / obs[i - 1].level).ln(),
            });
        }
    }
    debug_assert_eq!(returns.len(), expected);

    Ok(ReturnSeries {
        basis: series.basis(),
        exclude_overnight,
        returns,
        dates: series.dates(),
        day_starts,
        closes,
    })
}

/// Aggregation interval for realized volatility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Window {
    /// All returns of one trading day.
    Day,
    /// All returns whose timestamps fall in one clock minute of the calendar's
    /// sessions.
    Minute(TradingCalendar),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    Daily,
    Minutely,
}

/// Dispersion statistic used to express thresholds in `sigma` units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaKind {
    #[default]
    #[serde(alias = "std")]
    StandardDeviation,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolWindow {
    pub date: NaiveDate,
    /// Right edge of a minutely window; `None` for daily windows.
    pub end: Option<NaiveTime>,
    /// Index of the trading day this window belongs to.
    pub day: usize,
    pub value: f64,
    /// Number of returns aggregated into the window.
    pub returns: usize,
    /// Index level at the window's close, when known.
    pub close: Option<f64>,
}

impl VolWindow {
    /// A window with no returns, reported as zero volatility.
    pub fn is_empty(&self) -> bool {
        self.returns == 0
    }

    pub fn label(&self) -> String {
        match self.end {
            None => self.date.format("%Y-%m-%d").to_string(),
            Some(t) => format!("{} {}", self.date.format("%Y-%m-%d"), format_time(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    aggregation: Aggregation,
    windows: Vec<VolWindow>,
    sigma_kind: SigmaKind,
    sigma: Option<f64>,
}

impl VolatilitySeries {
    /// Builds a series from windows, computing `sigma` when at least two values exist.
    pub fn from_windows(aggregation: Aggregation, windows: Vec<VolWindow>) -> Self {
        let mut s = Self {
            aggregation,
            windows,
            sigma_kind: SigmaKind::default(),
            sigma: None,
        };
        s.set_sigma_kind(SigmaKind::default());
        s
    }

    /// Daily series from bare values, labelled with consecutive weekdays from
    /// `start`. Mostly useful for tests and synthetic studies.
    pub fn from_daily_values(start: NaiveDate, values: &[f64]) -> Self {
        let cal = TradingCalendar::default();
        let mut date = start;
        let windows = values
            .iter()
            .enumerate()
            .map(|(day, &value)| {
                while !cal.is_trading_day(date) {
                    date = date.succ_opt().unwrap();
                }
                let w = VolWindow {
                    date,
                    end: None,
                    day,
                    value,
                    returns: 1,
                    close: None,
                };
                date = date.succ_opt().unwrap();
                w
            })
            .collect();
        Self::from_windows(Aggregation::Daily, windows)
    }

    pub fn set_sigma_kind(&mut self, kind: SigmaKind) {
        self.sigma_kind = kind;
        self.sigma = sample_sigma_of(self.values(), kind).ok();
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    pub fn windows(&self) -> &[VolWindow] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.windows[i].value
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = f64> + Clone + '_ {
        self.windows.iter().map(|w| w.value)
    }

    pub fn sigma_kind(&self) -> SigmaKind {
        self.sigma_kind
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    /// `label,volatility` CSV export.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "label,volatility")?;
        for w in &self.windows {
            writeln!(out, "{},{:.9e}", w.label(), w.value)?;
        }
        Ok(())
    }
}

/// Realized volatility, one value per window. Windows without returns yield
/// zero and are reported via [`VolWindow::is_empty`].
pub fn realized_volatility(
    returns: &ReturnSeries,
    window: &Window,
) -> Result<VolatilitySeries, VolatilityError> {
    if returns.is_empty() {
        return Err(VolatilityError::NoReturns);
    }
    match window {
        Window::Day => Ok(daily(returns)),
        Window::Minute(cal) => Ok(minutely(returns, cal)),
    }
}

fn daily(returns: &ReturnSeries) -> VolatilitySeries {
    let windows = returns
        .dates
        .iter()
        .enumerate()
        .map(|(d, &date)| {
            let rs = returns.day_returns(d);
            VolWindow {
                date,
                end: None,
                day: d,
                value: root_sum_squares(rs.iter().map(|r| r.value)),
                returns: rs.len(),
                close: Some(returns.closes[d]),
            }
        })
        .collect();
    VolatilitySeries::from_windows(Aggregation::Daily, windows)
}

fn minutely(returns: &ReturnSeries, cal: &TradingCalendar) -> VolatilitySeries {
    let grid: Vec<u32> = cal.minute_grid().into_iter().map(minute_of_day).collect();
    let mut windows = Vec::with_capacity(returns.dates.len() * grid.len());
    for (d, &date) in returns.dates.iter().enumerate() {
        let rs = returns.day_returns(d);
        let mut pos = 0;
        for &m in &grid {
            let start = pos;
            while pos < rs.len() && window_minute(rs[pos].time) <= m {
                pos += 1;
            }
            let chunk = &rs[start..pos];
            windows.push(VolWindow {
                date,
                end: Some(time_from_minute(m)),
                day: d,
                value: root_sum_squares(chunk.iter().map(|r| r.value)),
                returns: chunk.len(),
                close: None,
            });
        }
        // returns stamped after the last session close cannot occur for
        // calendar-validated input; fold any stragglers into the last window
        if pos < rs.len() {
            let last = windows.last_mut().expect("grid is non-empty");
            let extra = &rs[pos..];
            let sq =
                last.value * last.value + compensated_sum(extra.iter().map(|r| r.value * r.value));
            last.value = sq.sqrt();
            last.returns += extra.len();
        }
    }
    VolatilitySeries::from_windows(Aggregation::Minutely, windows)
}

/// Minute `m` such that `t` lies in `(m - 1, m]`.
fn window_minute(t: NaiveTime) -> u32 {
    let m = minute_of_day(t);
    if t.second() > 0 || t.nanosecond() > 0 {
        m + 1
    } else {
        m
    }
}

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn root_sum_squares<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    compensated_sum(values.into_iter().map(|r| r * r)).sqrt()
}

/// Sample standard deviation (n - 1 denominator) or mean of the volatility values.
pub fn sample_sigma(vols: &VolatilitySeries, kind: SigmaKind) -> Result<f64, VolatilityError> {
    sample_sigma_of(vols.values(), kind)
}

fn sample_sigma_of<I>(values: I, kind: SigmaKind) -> Result<f64, VolatilityError>
where
    I: ExactSizeIterator<Item = f64> + Clone,
{
    let n = values.len();
    if n < 2 {
        return Err(VolatilityError::TooFewValues(n));
    }
    let mean = compensated_sum(values.clone()) / n as f64;
    match kind {
        SigmaKind::Mean => Ok(mean),
        SigmaKind::StandardDeviation => {
            let ss = compensated_sum(values.map(|v| (v - mean) * (v - mean)));
            Ok((ss / (n - 1) as f64).sqrt())
        }
    }
}
