use chrono::NaiveDate;
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{seeded_rng, SimError};
use crate::ingest::{Observation, PriceSeries, TimeBasis, TradingCalendar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedShock {
    /// Zero-based trading-day index.
    pub day: usize,
    /// Daily volatility as a multiple of the base level; must exceed 1.
    pub magnitude: f64,
}

/// Elevated-volatility days following each shock. The day `s` trading days
/// after a shock is excited with probability `min(1, K (s + tau)^-p)` for
/// `s = 1..=window`; an excited day's volatility is `excitation` times base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    #[serde(rename = "K")]
    pub k: f64,
    pub p: f64,
    pub tau: f64,
    pub excitation: f64,
    pub window: usize,
}

fn default_bars() -> usize {
    240
}

fn default_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2001, 2, 5).expect("valid date")
}

fn default_start_price() -> f64 {
    2000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSeriesSpec {
    pub base_vol: f64,
    #[serde(default)]
    pub shocks: Vec<PlantedShock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayProfile>,
    pub days: usize,
    #[serde(default = "default_bars")]
    pub bars_per_day: usize,
    /// Log-normal dispersion of daily volatility around its target.
    #[serde(default)]
    pub vol_dispersion: f64,
    /// Rescale each day's returns so its realized volatility equals the target exactly.
    #[serde(default)]
    pub exact: bool,
    pub seed: u64,
    #[serde(default = "default_start_date")]
    pub start_date: NaiveDate,
    #[serde(default = "default_start_price")]
    pub start_price: f64,
}

impl PlantedSeriesSpec {
    pub fn new(base_vol: f64, days: usize, seed: u64) -> Self {
        Self {
            base_vol,
            shocks: Vec::new(),
            decay: None,
            days,
            bars_per_day: default_bars(),
            vol_dispersion: 0.0,
            exact: false,
            seed,
            start_date: default_start_date(),
            start_price: default_start_price(),
        }
    }

    pub fn with_shock(mut self, day: usize, magnitude: f64) -> Self {
        self.shocks.push(PlantedShock { day, magnitude });
        self
    }

    pub fn validate(&self, calendar: &TradingCalendar) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(m));
        if !(self.base_vol.is_finite() && self.base_vol > 0.0) {
            return bad(format!("base_vol must be positive, got {}", self.base_vol));
        }
        if self.days < 2 {
            return bad("need at least 2 days".into());
        }
        let grid = calendar.minute_grid().len();
        if self.bars_per_day < 2 || self.bars_per_day > grid {
            return bad(format!("bars_per_day must be in 2..={grid}"));
        }
        if !(self.vol_dispersion.is_finite() && self.vol_dispersion >= 0.0) {
            return bad("vol_dispersion must be non-negative".into());
        }
        if !(self.start_price.is_finite() && self.start_price > 0.0) {
            return bad("start_price must be positive".into());
        }
        for s in &self.shocks {
            if !(s.magnitude.is_finite() && s.magnitude > 1.0) {
                return bad(format!(
                    "shock magnitude must exceed 1, got {}",
                    s.magnitude
                ));
            }
            if s.day >= self.days {
                return bad(format!("shock day {} outside 0..{}", s.day, self.days));
            }
        }
        if let Some(d) = &self.decay {
            let ok = d.k > 0.0 && d.tau > 0.0 && d.p.is_finite() && d.excitation > 0.0;
            if !ok {
                return bad("decay profile needs K > 0, tau > 0, finite p, excitation > 0".into());
            }
        }
        Ok(())
    }
}

/// Per-day record of what was planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub dates: Vec<NaiveDate>,
    pub target_vol: Vec<f64>,
    pub shock_days: Vec<usize>,
    pub excited_days: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PlantedSeries {
    pub series: PriceSeries,
    pub truth: PlantedTruth,
}

/// Minute-bar price path whose daily realized volatility (intraday returns
/// only) follows the planted profile.
pub fn synthetic_price_series(
    spec: &PlantedSeriesSpec,
    calendar: &TradingCalendar,
) -> Result<PlantedSeries, SimError> {
    spec.validate(calendar)?;
    let mut rng = seeded_rng(spec.seed);
    let times: Vec<_> = calendar
        .minute_grid()
        .into_iter()
        .take(spec.bars_per_day)
        .collect();
    let dates = trading_dates(calendar, spec.start_date, spec.days);

    let mut observations = Vec::with_capacity(spec.days * spec.bars_per_day);
    let mut target_vol = Vec::with_capacity(spec.days);
    let mut excited_days = Vec::new();
    let mut level = spec.start_price;
    let mut draws = vec![0.0f64; spec.bars_per_day - 1];
    let eta = spec.vol_dispersion;

    for (d, &date) in dates.iter().enumerate() {
        let u: f64 = rng.random();
        let z: f64 = StandardNormal.sample(&mut rng);
        let shock = spec
            .shocks
            .iter()
            .filter(|s| s.day == d)
            .map(|s| s.magnitude)
            .fold(None, |acc: Option<f64>, m| {
                Some(acc.map_or(m, |a| a.max(m)))
            });
        let multiple = match shock {
            Some(m) => m,
            None => {
                let p_excite = spec
                    .decay
                    .map_or(0.0, |decay| excitation_probability(spec, &decay, d));
                if u < p_excite {
                    excited_days.push(d);
                    spec.decay.map_or(1.0, |decay| decay.excitation)
                } else {
                    1.0
                }
            }
        };
        let dispersion = if eta > 0.0 {
            (eta * z - 0.5 * eta * eta).exp()
        } else {
            1.0
        };
        let target = spec.base_vol * multiple * dispersion;
        target_vol.push(target);

        for v in draws.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let scale = if spec.exact {
            let norm = draws.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                target / norm
            } else {
                0.0
            }
        } else {
            target / ((spec.bars_per_day - 1) as f64).sqrt()
        };

        observations.push(Observation {
            date,
            time: times[0],
            level,
        });
        for (i, v) in draws.iter().enumerate() {
            level *= (scale * v).exp();
            observations.push(Observation {
                date,
                time: times[i + 1],
                level,
            });
        }
    }

    let series = PriceSeries::new(TimeBasis::MINUTE, observations)
        .map_err(|e| SimError::Invalid(format!("generated series is invalid: {e}")))?;
    let mut shock_days: Vec<usize> = spec.shocks.iter().map(|s| s.day).collect();
    shock_days.sort_unstable();
    shock_days.dedup();
    Ok(PlantedSeries {
        series,
        truth: PlantedTruth {
            dates,
            target_vol,
            shock_days,
            excited_days,
        },
    })
}

fn excitation_probability(spec: &PlantedSeriesSpec, decay: &DecayProfile, day: usize) -> f64 {
    let mut quiet = 1.0;
    for s in &spec.shocks {
        if day > s.day && day - s.day <= decay.window {
            let lag = (day - s.day) as f64;
            let p = (decay.k * (lag + decay.tau).powf(-decay.p)).min(1.0);
            quiet *= 1.0 - p;
        }
    }
    1.0 - quiet
}

fn trading_dates(calendar: &TradingCalendar, start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| calendar.is_trading_day(*d))
        .take(n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volatility::{log_returns, realized_volatility, Window};

    fn daily_vols(series: &PriceSeries) -> Vec<f64> {
        let r = log_returns(series, true).unwrap();
        realized_volatility(&r, &Window::Day)
            .unwrap()
            .values()
            .collect()
    }

    #[test]
    fn exact_mode_hits_targets() {
        let mut spec = PlantedSeriesSpec::new(1e-3, 20, 5).with_shock(7, 12.0);
        spec.exact = true;
        let cal = TradingCalendar::default();
        let out = synthetic_price_series(&spec, &cal).unwrap();
        assert_eq!(out.series.len(), 20 * 240);
        assert_eq!(out.series.day_count(), 20);
        let v = daily_vols(&out.series);
        for (d, (got, want)) in v.iter().zip(&out.truth.target_vol).enumerate() {
            assert!((got - want).abs() < 1e-12, "day {d}: {got} vs {want}");
        }
        assert!((v[7] - 12e-3).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = PlantedSeriesSpec::new(1e-3, 5, 9).with_shock(2, 4.0);
        let cal = TradingCalendar::default();
        let a = synthetic_price_series(&spec, &cal).unwrap();
        let b = synthetic_price_series(&spec, &cal).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.series.to_csv_string(), b.series.to_csv_string());
    }

    #[test]
    fn dates_skip_weekends() {
        let spec = PlantedSeriesSpec::new(1e-3, 6, 1);
        let out = synthetic_price_series(&spec, &TradingCalendar::default()).unwrap();
        let dates = out.series.dates();
        // 2001-02-05 is a Monday
        assert_eq!(dates[5], NaiveDate::from_ymd_opt(2001, 2, 12).unwrap());
    }

    #[test]
    fn decay_excites_days_after_shock_only() {
        let mut spec = PlantedSeriesSpec::new(1e-3, 80, 11).with_shock(10, 10.0);
        spec.decay = Some(DecayProfile {
            k: 5.0,
            p: 1.2,
            tau: 2.0,
            excitation: 4.0,
            window: 25,
        });
        let out = synthetic_price_series(&spec, &TradingCalendar::default()).unwrap();
        assert!(!out.truth.excited_days.is_empty());
        assert!(out.truth.excited_days.iter().all(|&d| d > 10 && d <= 35));
        // K (s + tau)^-p >= 1 for the first lags, so they are always excited
        assert!(out.truth.excited_days.contains(&11));
    }

    #[test]
    fn invalid_specs() {
        let cal = TradingCalendar::default();
        assert!(synthetic_price_series(&PlantedSeriesSpec::new(0.0, 10, 1), &cal).is_err());
        assert!(synthetic_price_series(
            &PlantedSeriesSpec::new(1e-3, 10, 1).with_shock(3, 0.5),
            &cal
        )
        .is_err());
        assert!(synthetic_price_series(
            &PlantedSeriesSpec::new(1e-3, 10, 1).with_shock(10, 5.0),
            &cal
        )
        .is_err());
    }
}
