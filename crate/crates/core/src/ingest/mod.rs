//! Price-file ingestion: the trading calendar, the day-partitioned
//! [`PriceSeries`], CSV parsers for minute bars and event-time quotes, and a
//! read-only validation report.

mod calendar;
mod parse;
mod series;
mod validate;

pub use calendar::{parse_session, Session, TradingCalendar};
pub use parse::{
    open_input, parse_event_quotes, parse_file, parse_minute_bars, parse_with_format, InputFormat,
    ParseReport, Parsed,
};
pub use series::{format_time, Observation, PriceSeries, TimeBasis};
pub use validate::{validate_series, DaySummary, Gap, ValidationReport};

pub(crate) use calendar::{minute_of_day, time_from_minute};

use chrono::NaiveDate;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("read failure: {0}")]
    Read(#[source] std::io::Error),
    #[error("missing or invalid header (expected `date,time,price`, found `{found}`)")]
    Header { found: String },
    #[error("line {line}: malformed row: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: non-positive price {price}")]
    NonPositivePrice { line: usize, price: String },
    #[error("line {line}: out-of-order timestamp: {detail}")]
    OutOfOrder { line: usize, detail: String },
    #[error("line {line}: {date} is not a trading date")]
    UnknownTradingDate { line: usize, date: NaiveDate },
    #[error("invalid calendar: {0}")]
    Calendar(String),
}
