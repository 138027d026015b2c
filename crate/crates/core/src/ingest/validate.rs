use std::collections::BTreeSet;

use chrono::{NaiveDate, NaiveTime, Timelike};
use serde::Serialize;

use super::calendar::TradingCalendar;
use super::series::{format_time, PriceSeries, TimeBasis};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub date: NaiveDate,
    #[serde(serialize_with = "ser_time")]
    pub time: NaiveTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DaySummary {
    pub date: NaiveDate,
    pub observations: usize,
    pub gaps: usize,
}

/// Read-only data-quality summary of a [`PriceSeries`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub basis: TimeBasis,
    pub observations: usize,
    pub day_count: usize,
    pub gap_count: usize,
    pub gaps: Vec<Gap>,
    pub out_of_session: usize,
    pub off_grid: usize,
    pub non_calendar_days: Vec<NaiveDate>,
    pub days: Vec<DaySummary>,
}

impl ValidationReport {
    /// Structural problems, as opposed to tolerated gaps.
    pub fn has_errors(&self) -> bool {
        self.out_of_session > 0 || self.off_grid > 0 || !self.non_calendar_days.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn ser_time<S: serde::Serializer>(t: &NaiveTime, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_time(*t))
}

/// Gap counts refer to missing end-of-minute bars and are only computed for a
/// one-minute clock basis; event-time series report zero gaps.
pub fn validate_series(series: &PriceSeries, calendar: &TradingCalendar) -> ValidationReport {
    let grid = calendar.minute_grid();
    let minute_bars = series.basis() == TimeBasis::MINUTE;

    let mut gaps = Vec::new();
    let mut days = Vec::with_capacity(series.day_count());
    let mut out_of_session = 0;
    let mut off_grid = 0;
    let mut non_calendar_days = Vec::new();

    for (date, obs) in series.days() {
        if !calendar.is_trading_day(date) {
            non_calendar_days.push(date);
        }
        out_of_session += obs
            .iter()
            .filter(|o| calendar.session_of(o.time).is_none())
            .count();
        let mut day_gaps = 0;
        if minute_bars {
            off_grid += obs
                .iter()
                .filter(|o| o.time.second() != 0 || o.time.nanosecond() != 0)
                .count();
            let present: BTreeSet<NaiveTime> = obs.iter().map(|o| o.time).collect();
            for &t in &grid {
                if !present.contains(&t) {
                    gaps.push(Gap { date, time: t });
                    day_gaps += 1;
                }
            }
        }
        days.push(DaySummary {
            date,
            observations: obs.len(),
            gaps: day_gaps,
        });
    }

    ValidationReport {
        basis: series.basis(),
        observations: series.len(),
        day_count: series.day_count(),
        gap_count: gaps.len(),
        gaps,
        out_of_session,
        off_grid,
        non_calendar_days,
        days,
    }
}
