use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate, NaiveTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use super::IngestError;

/// One continuous trading session, bounded by clock times on a single day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub open: NaiveTime,
    pub close: NaiveTime,
}

impl Session {
    pub fn new(open: NaiveTime, close: NaiveTime) -> Self {
        Self { open, close }
    }

    pub fn contains(&self, t: NaiveTime) -> bool {
        t >= self.open && t <= self.close
    }
}

/// Intraday sessions plus the set of dates on which the market trades.
///
/// When no explicit day list is supplied, every Monday to Friday is treated as
/// a trading date; the actual trading-day list of a series is then derived from
/// the data itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingCalendar {
    sessions: Vec<Session>,
    days: Option<BTreeSet<NaiveDate>>,
}

impl Default for TradingCalendar {
    /// Continuous double auction hours: 09:30-11:30 and 13:00-15:00.
    fn default() -> Self {
        let hm = |h, m| NaiveTime::from_hms_opt(h, m, 0).unwrap();
        Self {
            sessions: vec![
                Session::new(hm(9, 30), hm(11, 30)),
                Session::new(hm(13, 0), hm(15, 0)),
            ],
            days: None,
        }
    }
}

impl TradingCalendar {
    pub fn new(sessions: Vec<Session>) -> Result<Self, IngestError> {
        if sessions.is_empty() {
            return Err(IngestError::Calendar(
                "at least one session is required".into(),
            ));
        }
        for s in &sessions {
            if s.open >= s.close {
                return Err(IngestError::Calendar(format!(
                    "session {}-{} does not close after it opens",
                    s.open, s.close
                )));
            }
        }
        for pair in sessions.windows(2) {
            if pair[1].open <= pair[0].close {
                return Err(IngestError::Calendar(format!(
                    "sessions {}-{} and {}-{} overlap or are out of order",
                    pair[0].open, pair[0].close, pair[1].open, pair[1].close
                )));
            }
        }
        Ok(Self {
            sessions,
            days: None,
        })
    }

    /// Restricts the calendar to an explicit list of trading dates.
    pub fn with_days<I: IntoIterator<Item = NaiveDate>>(mut self, days: I) -> Self {
        self.days = Some(days.into_iter().collect());
        self
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn explicit_days(&self) -> Option<&BTreeSet<NaiveDate>> {
        self.days.as_ref()
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        match &self.days {
            Some(days) => days.contains(&date),
            None => !matches!(date.weekday(), Weekday::Sat | Weekday::Sun),
        }
    }

    /// Index of the session containing `t` (bounds inclusive).
    pub fn session_of(&self, t: NaiveTime) -> Option<usize> {
        self.sessions.iter().position(|s| s.contains(t))
    }

    /// Trading dates in `[first, last]` according to this calendar.
    pub fn trading_days_between(&self, first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
        match &self.days {
            Some(days) => days.range(first..=last).copied().collect(),
            None => first
                .iter_days()
                .take_while(|d| *d <= last)
                .filter(|d| self.is_trading_day(*d))
                .collect(),
        }
    }

    /// End-of-minute bar times for one trading day: every minute strictly after
    /// a session's open up to and including its close.
    pub fn minute_grid(&self) -> Vec<NaiveTime> {
        let mut grid = Vec::new();
        for s in &self.sessions {
            let open = minute_of_day(s.open);
            let close = minute_of_day(s.close);
            for m in open + 1..=close {
                grid.push(time_from_minute(m));
            }
        }
        grid
    }

    pub fn minutes_per_day(&self) -> usize {
        self.sessions
            .iter()
            .map(|s| (minute_of_day(s.close) - minute_of_day(s.open)) as usize)
            .sum()
    }
}

pub(crate) fn minute_of_day(t: NaiveTime) -> u32 {
    t.hour() * 60 + t.minute()
}

pub(crate) fn time_from_minute(m: u32) -> NaiveTime {
    NaiveTime::from_hms_opt(m / 60, m % 60, 0).expect("minute of day in range")
}

/// Parses a `HH:MM-HH:MM` session spec.
pub fn parse_session(spec: &str) -> Result<Session, IngestError> {
    let bad = || IngestError::Calendar(format!("bad session spec {spec:?}, expected HH:MM-HH:MM"));
    let (a, b) = spec.split_once('-').ok_or_else(bad)?;
    let open = NaiveTime::parse_from_str(a.trim(), "%H:%M").map_err(|_| bad())?;
    let close = NaiveTime::parse_from_str(b.trim(), "%H:%M").map_err(|_| bad())?;
    Ok(Session::new(open, close))
}
