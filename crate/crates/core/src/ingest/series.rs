use std::io::Write;

use chrono::{NaiveDate, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use super::IngestError;

/// How consecutive observations are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeBasis {
    /// Fixed clock interval between observations, in seconds.
    Clock { step_secs: u32 },
    /// One step per recorded quote.
    Event,
}

impl TimeBasis {
    pub const MINUTE: TimeBasis = TimeBasis::Clock { step_secs: 60 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub level: f64,
}

/// Index levels ordered in time and partitioned into trading days.
///
/// Immutable once built; every constructor checks that levels are positive and
/// finite, that dates never go backwards, and that timestamps within a day are
/// ordered (strictly for clock time, non-strictly for event time).
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    basis: TimeBasis,
    observations: Vec<Observation>,
    day_starts: Vec<usize>,
}

impl PriceSeries {
    pub fn new(basis: TimeBasis, observations: Vec<Observation>) -> Result<Self, IngestError> {
        let mut day_starts = Vec::new();
        for (i, obs) in observations.iter().enumerate() {
            if !(obs.level.is_finite() && obs.level > 0.0) {
                return Err(IngestError::NonPositivePrice {
                    line: i + 1,
                    price: obs.level.to_string(),
                });
            }
            if i == 0 {
                day_starts.push(0);
                continue;
            }
            let prev = &observations[i - 1];
            if obs.date != prev.date {
                if obs.date < prev.date {
                    return Err(IngestError::OutOfOrder {
                        line: i + 1,
                        detail: format!("date {} follows {}", obs.date, prev.date),
                    });
                }
                day_starts.push(i);
            } else if !time_advances(basis, prev.time, obs.time) {
                return Err(IngestError::OutOfOrder {
                    line: i + 1,
                    detail: format!("time {} follows {} on {}", obs.time, prev.time, obs.date),
                });
            }
        }
        Ok(Self {
            basis,
            observations,
            day_starts,
        })
    }

    pub fn basis(&self) -> TimeBasis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Index of the first observation of each trading day.
    pub fn day_starts(&self) -> &[usize] {
        &self.day_starts
    }

    pub fn day_count(&self) -> usize {
        self.day_starts.len()
    }

    /// Observation index range of day `d`.
    pub fn day_range(&self, d: usize) -> std::ops::Range<usize> {
        let start = self.day_starts[d];
        let end = self
            .day_starts
            .get(d + 1)
            .copied()
            .unwrap_or(self.observations.len());
        start..end
    }

    pub fn days(&self) -> impl Iterator<Item = (NaiveDate, &[Observation])> + '_ {
        (0..self.day_count()).map(move |d| {
            let slice = &self.observations[self.day_range(d)];
            (slice[0].date, slice)
        })
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.day_starts
            .iter()
            .map(|&i| self.observations[i].date)
            .collect()
    }

    /// Writes the canonical `date,time,price` CSV form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "date,time,price")?;
        for obs in &self.observations {
            writeln!(
                out,
                "{},{},{}",
                obs.date.format("%Y-%m-%d"),
                format_time(obs.time),
                obs.level
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::with_capacity(self.observations.len() * 28 + 16);
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

fn time_advances(basis: TimeBasis, prev: NaiveTime, next: NaiveTime) -> bool {
    match basis {
        TimeBasis::Clock { .. } => next > prev,
        TimeBasis::Event => next >= prev,
    }
}

/// `HH:MM` when seconds are zero, `HH:MM:SS` otherwise.
pub fn format_time(t: NaiveTime) -> String {
    if t.second() == 0 {
        format!("{:02}:{:02}", t.hour(), t.minute())
    } else {
        format!("{:02}:{:02}:{:02}", t.hour(), t.minute(), t.second())
    }
}
