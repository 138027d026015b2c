use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use chrono::{NaiveDate, NaiveTime};
use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use super::calendar::TradingCalendar;
use super::series::{Observation, PriceSeries, TimeBasis};
use super::IngestError;

/// Which of the two supported input layouts a file uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    MinuteBars,
    EventQuotes,
}

impl InputFormat {
    fn basis(self) -> TimeBasis {
        match self {
            InputFormat::MinuteBars => TimeBasis::MINUTE,
            InputFormat::EventQuotes => TimeBasis::Event,
        }
    }
}

/// Row accounting for one parse. `accepted + rejected_out_of_session == data_rows`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub data_rows: usize,
    pub accepted: usize,
    pub rejected_out_of_session: usize,
    pub empty_days: Vec<NaiveDate>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub series: PriceSeries,
    pub report: ParseReport,
}

pub fn parse_minute_bars<R: Read>(
    source: R,
    calendar: &TradingCalendar,
) -> Result<Parsed, IngestError> {
    parse(source, calendar, InputFormat::MinuteBars)
}

pub fn parse_event_quotes<R: Read>(
    source: R,
    calendar: &TradingCalendar,
) -> Result<Parsed, IngestError> {
    parse(source, calendar, InputFormat::EventQuotes)
}

pub fn parse_with_format<R: Read>(
    source: R,
    calendar: &TradingCalendar,
    format: InputFormat,
) -> Result<Parsed, IngestError> {
    parse(source, calendar, format)
}

/// Opens `path`, transparently decompressing when the name ends in `.gz`.
pub fn open_input(path: &Path) -> Result<Box<dyn Read>, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let gz = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("gz"));
    if gz {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
    }
}

pub fn parse_file(
    path: &Path,
    calendar: &TradingCalendar,
    format: InputFormat,
) -> Result<Parsed, IngestError> {
    parse(open_input(path)?, calendar, format)
}

fn parse<R: Read>(
    source: R,
    calendar: &TradingCalendar,
    format: InputFormat,
) -> Result<Parsed, IngestError> {
    let basis = format.basis();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut record = csv::ByteRecord::new();
    let mut report = ParseReport::default();
    let mut observations: Vec<Observation> = Vec::new();
    let mut header_seen = false;

    loop {
        let more = reader.read_byte_record(&mut record).map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            match e.into_kind() {
                csv::ErrorKind::Io(err) => IngestError::Read(err),
                other => IngestError::Malformed {
                    line,
                    reason: format!("{other:?}"),
                },
            }
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if !header_seen {
            check_header(&record)?;
            header_seen = true;
            continue;
        }
        report.data_rows += 1;

        if record.len() != 3 {
            return Err(IngestError::Malformed {
                line,
                reason: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let date = parse_date(trim(&record[0])).ok_or_else(|| IngestError::Malformed {
            line,
            reason: "date is not YYYY-MM-DD".into(),
        })?;
        let time = parse_time(trim(&record[1])).ok_or_else(|| IngestError::Malformed {
            line,
            reason: "time is not HH:MM[:SS]".into(),
        })?;
        let price_field = trim(&record[2]);
        let price = std::str::from_utf8(price_field)
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| IngestError::Malformed {
                line,
                reason: "price is not a decimal number".into(),
            })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(IngestError::NonPositivePrice {
                line,
                price: String::from_utf8_lossy(price_field).into_owned(),
            });
        }
        if !calendar.is_trading_day(date) {
            return Err(IngestError::UnknownTradingDate { line, date });
        }
        if calendar.session_of(time).is_none() {
            report.rejected_out_of_session += 1;
            continue;
        }
        if let Some(prev) = observations.last() {
            let ordered = if date == prev.date {
                match basis {
                    TimeBasis::Clock { .. } => time > prev.time,
                    TimeBasis::Event => time >= prev.time,
                }
            } else {
                date > prev.date
            };
            if !ordered {
                return Err(IngestError::OutOfOrder {
                    line,
                    detail: format!("{date} {time} follows {} {}", prev.date, prev.time),
                });
            }
        }
        observations.push(Observation {
            date,
            time,
            level: price,
        });
    }

    if !header_seen {
        return Err(IngestError::Header {
            found: String::new(),
        });
    }

    report.accepted = observations.len();
    if let (Some(first), Some(last)) = (observations.first(), observations.last()) {
        let mut present = observations.iter().map(|o| o.date).peekable();
        for day in calendar.trading_days_between(first.date, last.date) {
            while present.peek().is_some_and(|d| *d < day) {
                present.next();
            }
            if present.peek() != Some(&day) {
                report.empty_days.push(day);
                report
                    .warnings
                    .push(format!("no rows for trading date {day}"));
            }
        }
    }

    let series = PriceSeries::new(basis, observations)?;
    Ok(Parsed { series, report })
}

fn check_header(record: &csv::ByteRecord) -> Result<(), IngestError> {
    let names: Vec<String> = record
        .iter()
        .map(|f| String::from_utf8_lossy(trim(f)).to_ascii_lowercase())
        .collect();
    let ok = names.len() == 3 && names[0] == "date" && names[1] == "time" && names[2] == "price";
    if ok {
        Ok(())
    } else {
        Err(IngestError::Header {
            found: names.join(","),
        })
    }
}

fn trim(field: &[u8]) -> &[u8] {
    let start = field.iter().position(|b| !b.is_ascii_whitespace());
    match start {
        None => &[],
        Some(s) => {
            let end = field
                .iter()
                .rposition(|b| !b.is_ascii_whitespace())
                .unwrap();
            &field[s..=end]
        }
    }
}

fn digits(bytes: &[u8]) -> Option<u32> {
    if bytes.is_empty() {
        return None;
    }
    bytes.iter().try_fold(0u32, |acc, b| {
        b.is_ascii_digit().then(|| acc * 10 + u32::from(b - b'0'))
    })
}

fn parse_date(b: &[u8]) -> Option<NaiveDate> {
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    let y = digits(&b[0..4])?;
    let m = digits(&b[5..7])?;
    let d = digits(&b[8..10])?;
    NaiveDate::from_ymd_opt(y as i32, m, d)
}

fn parse_time(b: &[u8]) -> Option<NaiveTime> {
    let (h, m, s) = match b.len() {
        5 if b[2] == b':' => (digits(&b[0..2])?, digits(&b[3..5])?, 0),
        8 if b[2] == b':' && b[5] == b':' => {
            (digits(&b[0..2])?, digits(&b[3..5])?, digits(&b[6..8])?)
        }
        _ => return None,
    };
    NaiveTime::from_hms_opt(h, m, s)
}
