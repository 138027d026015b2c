//! C ABI over the `aftershock` library.
//!
//! Conventions:
//! * every fallible function returns an [`AftershockStatus`]; on anything but
//!   `AFTERSHOCK_STATUS_OK` the calling thread's last error message is set and
//!   can be read with [`aftershock_last_error`];
//! * series, volatility and shock lists are opaque handles owned by the caller
//!   and released with their `_free` function (`NULL` is accepted);
//! * results are written through out-pointers, which are left untouched on
//!   failure;
//! * panics never cross the boundary; they surface as `AFTERSHOCK_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use chrono::NaiveDate;

use aftershock::ingest::{
    parse_file, parse_with_format, InputFormat, PriceSeries, TradingCalendar,
};
use aftershock::omori::{
    count_aftershocks, fit_cumulative, linear_limit_slope, omori_cumulative, omori_rate,
    FitOptions, OmoriFit,
};
use aftershock::shockdetect::{detect_shocks, DetectParams, Shock};
use aftershock::simulate::{simulate_omori_events, EventRecord, SimMode, SimSpec};
use aftershock::volatility::{
    log_returns, realized_volatility, sample_sigma, SigmaKind, VolatilitySeries, Window,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AftershockStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    /// Not enough data, or a curve that cannot be fitted.
    Degenerate = 5,
    BufferTooSmall = 6,
    IndexOutOfRange = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AftershockFormat {
    MinuteBars = 0,
    EventQuotes = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AftershockAggregation {
    Daily = 0,
    Minutely = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AftershockSigmaKind {
    StandardDeviation = 0,
    Mean = 1,
}

/// Opaque parsed price series.
pub struct AftershockPriceSeries(PriceSeries);

/// Opaque realized-volatility series.
pub struct AftershockVolatility(VolatilitySeries);

/// Opaque list of detected main shocks.
pub struct AftershockShockList(Vec<Shock>);

/// One main shock; indices refer to the volatility series it came from.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AftershockShock {
    pub t0: usize,
    pub t1: usize,
    pub duration: usize,
    pub v_max: f64,
    pub v_min: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AftershockFit {
    pub k: f64,
    pub p: f64,
    pub tau: f64,
    pub sse: f64,
    pub converged: bool,
    pub iterations: u32,
}

impl From<&OmoriFit> for AftershockFit {
    fn from(f: &OmoriFit) -> Self {
        Self {
            k: f.k,
            p: f.p,
            tau: f.tau,
            sse: f.sse,
            converged: f.converged,
            iterations: f.iterations as u32,
        }
    }
}

#[derive(Debug)]
struct Failure(AftershockStatus, String);

impl Failure {
    fn new(status: AftershockStatus, msg: impl ToString) -> Self {
        Self(status, msg.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> AftershockStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AftershockStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            AftershockStatus::Panic
        }
    }
}

fn non_null<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either NULL or a pointer obtained from this library
    // (or to caller-owned memory of the right type) that outlives the call.
    unsafe { ptr.as_ref() }
        .ok_or_else(|| Failure::new(AftershockStatus::NullPointer, format!("{what} is NULL")))
}

fn out_ptr<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as for `non_null`; the pointee is writable caller memory.
    unsafe { ptr.as_mut() }
        .ok_or_else(|| Failure::new(AftershockStatus::NullPointer, format!("{what} is NULL")))
}

fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::new(
            AftershockStatus::NullPointer,
            format!("{what} is NULL"),
        ));
    }
    // SAFETY: the caller guarantees `len` readable elements at `ptr`.
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::new(
            AftershockStatus::NullPointer,
            format!("{what} is NULL"),
        ));
    }
    // SAFETY: the caller guarantees `len` writable elements at `ptr`.
    Ok(unsafe { std::slice::from_raw_parts_mut(ptr, len) })
}

fn invalid(e: impl ToString) -> Failure {
    Failure::new(AftershockStatus::InvalidArgument, e)
}

fn format_of(f: AftershockFormat) -> InputFormat {
    match f {
        AftershockFormat::MinuteBars => InputFormat::MinuteBars,
        AftershockFormat::EventQuotes => InputFormat::EventQuotes,
    }
}

fn ingest_failure(e: aftershock::ingest::IngestError) -> Failure {
    use aftershock::ingest::IngestError;
    let status = match e {
        IngestError::Io { .. } | IngestError::Read(_) => AftershockStatus::Io,
        _ => AftershockStatus::Parse,
    };
    Failure::new(status, e)
}

/// Message for the last failure on this thread, or NULL if none occurred.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aftershock_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aftershock_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a `date,time,price` CSV file (`.gz` is decompressed) against the
/// default calendar.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn aftershock_series_parse_file(
    path: *const c_char,
    format: AftershockFormat,
    out: *mut *mut AftershockPriceSeries,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = non_null(path, "path")?;
        // SAFETY: non-NULL and NUL-terminated per the contract.
        let path = unsafe { CStr::from_ptr(path) }.to_str().map_err(invalid)?;
        let parsed = parse_file(
            Path::new(path),
            &TradingCalendar::default(),
            format_of(format),
        )
        .map_err(ingest_failure)?;
        *out = Box::into_raw(Box::new(AftershockPriceSeries(parsed.series)));
        Ok(())
    })
}

/// Parses CSV text held in memory.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_series_parse_buffer(
    data: *const u8,
    len: usize,
    format: AftershockFormat,
    out: *mut *mut AftershockPriceSeries,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let bytes = slice(data, len, "data")?;
        let parsed = parse_with_format(bytes, &TradingCalendar::default(), format_of(format))
            .map_err(ingest_failure)?;
        *out = Box::into_raw(Box::new(AftershockPriceSeries(parsed.series)));
        Ok(())
    })
}

/// Number of observations, or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aftershock_series_len(series: *const AftershockPriceSeries) -> usize {
    // SAFETY: NULL or live handle per the contract.
    unsafe { series.as_ref() }.map_or(0, |s| s.0.len())
}

/// Number of trading days, or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aftershock_series_day_count(
    series: *const AftershockPriceSeries,
) -> usize {
    // SAFETY: NULL or live handle per the contract.
    unsafe { series.as_ref() }.map_or(0, |s| s.0.day_count())
}

/// # Safety
/// `series` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aftershock_series_free(series: *mut AftershockPriceSeries) {
    if !series.is_null() {
        // SAFETY: created by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(series) });
    }
}

/// Realized volatility of `series`, per trading day or per clock minute of
/// the default calendar.
///
/// # Safety
/// `series` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_volatility_compute(
    series: *const AftershockPriceSeries,
    aggregation: AftershockAggregation,
    exclude_overnight: bool,
    out: *mut *mut AftershockVolatility,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let series = non_null(series, "series")?;
        let returns = log_returns(&series.0, exclude_overnight)
            .map_err(|e| Failure::new(AftershockStatus::Degenerate, e))?;
        let window = match aggregation {
            AftershockAggregation::Daily => Window::Day,
            AftershockAggregation::Minutely => Window::Minute(TradingCalendar::default()),
        };
        let vols = realized_volatility(&returns, &window)
            .map_err(|e| Failure::new(AftershockStatus::Degenerate, e))?;
        *out = Box::into_raw(Box::new(AftershockVolatility(vols)));
        Ok(())
    })
}

/// Volatility series from raw daily values, labelled with weekdays from
/// 2001-02-05. Useful for driving detection and counting directly.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_volatility_from_values(
    values: *const f64,
    len: usize,
    out: *mut *mut AftershockVolatility,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let values = slice(values, len, "values")?;
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("volatility values must be finite and non-negative"));
        }
        let start = values_start();
        *out = Box::into_raw(Box::new(AftershockVolatility(
            VolatilitySeries::from_daily_values(start, values),
        )));
        Ok(())
    })
}

fn values_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2001, 2, 5).expect("valid date")
}

/// Number of windows, or 0 for NULL.
///
/// # Safety
/// `vols` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aftershock_volatility_len(vols: *const AftershockVolatility) -> usize {
    // SAFETY: NULL or live handle per the contract.
    unsafe { vols.as_ref() }.map_or(0, |v| v.0.len())
}

/// Copies the values into `buf`. `written` receives the series length even
/// when `cap` is too small, in which case `AFTERSHOCK_STATUS_BUFFER_TOO_SMALL`
/// is returned and nothing is copied.
///
/// # Safety
/// `vols` must be a live handle, `buf` must hold `cap` doubles and `written`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_volatility_values(
    vols: *const AftershockVolatility,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> AftershockStatus {
    guard(|| {
        let vols = non_null(vols, "vols")?;
        let written = out_ptr(written, "written")?;
        *written = vols.0.len();
        if cap < vols.0.len() {
            return Err(Failure::new(
                AftershockStatus::BufferTooSmall,
                format!("buffer holds {cap} values, need {}", vols.0.len()),
            ));
        }
        let buf = slice_mut(buf, vols.0.len(), "buf")?;
        for (dst, v) in buf.iter_mut().zip(vols.0.values()) {
            *dst = v;
        }
        Ok(())
    })
}

/// Sample dispersion of the values.
///
/// # Safety
/// `vols` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_volatility_sigma(
    vols: *const AftershockVolatility,
    kind: AftershockSigmaKind,
    out: *mut f64,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let vols = non_null(vols, "vols")?;
        let kind = match kind {
            AftershockSigmaKind::StandardDeviation => SigmaKind::StandardDeviation,
            AftershockSigmaKind::Mean => SigmaKind::Mean,
        };
        *out = sample_sigma(&vols.0, kind)
            .map_err(|e| Failure::new(AftershockStatus::Degenerate, e))?;
        Ok(())
    })
}

/// # Safety
/// `vols` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aftershock_volatility_free(vols: *mut AftershockVolatility) {
    if !vols.is_null() {
        // SAFETY: created by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(vols) });
    }
}

/// Main-shock detection: top `k` values, merged within `min_gap`, with a
/// `search_window` impact search. Zero for any parameter selects its default
/// (7, 30 and 60).
///
/// # Safety
/// `vols` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_detect_shocks(
    vols: *const AftershockVolatility,
    k: usize,
    min_gap: usize,
    search_window: usize,
    out: *mut *mut AftershockShockList,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let vols = non_null(vols, "vols")?;
        let d = DetectParams::default();
        let params = DetectParams {
            k: if k == 0 { d.k } else { k },
            min_gap: if min_gap == 0 { d.min_gap } else { min_gap },
            search_window: if search_window == 0 {
                d.search_window
            } else {
                search_window
            },
            duration: d.duration,
        };
        let shocks = detect_shocks(&vols.0, &params)
            .map_err(|e| Failure::new(AftershockStatus::Degenerate, e))?;
        *out = Box::into_raw(Box::new(AftershockShockList(shocks)));
        Ok(())
    })
}

/// Number of shocks, or 0 for NULL.
///
/// # Safety
/// `list` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aftershock_shocks_len(list: *const AftershockShockList) -> usize {
    // SAFETY: NULL or live handle per the contract.
    unsafe { list.as_ref() }.map_or(0, |l| l.0.len())
}

/// # Safety
/// `list` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_shocks_get(
    list: *const AftershockShockList,
    index: usize,
    out: *mut AftershockShock,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let list = non_null(list, "list")?;
        let s = list.0.get(index).ok_or_else(|| {
            Failure::new(
                AftershockStatus::IndexOutOfRange,
                format!("shock {index} requested from a list of {}", list.0.len()),
            )
        })?;
        *out = AftershockShock {
            t0: s.t0,
            t1: s.t1,
            duration: s.duration,
            v_max: s.v_max,
            v_min: s.v_min,
        };
        Ok(())
    })
}

/// # Safety
/// `list` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aftershock_shocks_free(list: *mut AftershockShockList) {
    if !list.is_null() {
        // SAFETY: created by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(list) });
    }
}

/// Cumulative aftershock counts `N(1..=T)` after shock `index` above the
/// absolute threshold `theta`, written into `counts` (`T = t1 - t0`).
/// `written` receives `T` even when `cap` is too small.
///
/// # Safety
/// Handles must be live, `counts` must hold `cap` values and `written` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_count(
    vols: *const AftershockVolatility,
    list: *const AftershockShockList,
    index: usize,
    theta: f64,
    counts: *mut u32,
    cap: usize,
    written: *mut usize,
) -> AftershockStatus {
    guard(|| {
        let vols = non_null(vols, "vols")?;
        let list = non_null(list, "list")?;
        let written = out_ptr(written, "written")?;
        let shock = list.0.get(index).ok_or_else(|| {
            Failure::new(
                AftershockStatus::IndexOutOfRange,
                format!("no shock {index}"),
            )
        })?;
        let curve = count_aftershocks(&vols.0, shock, theta).map_err(invalid)?;
        *written = curve.len();
        if cap < curve.len() {
            return Err(Failure::new(
                AftershockStatus::BufferTooSmall,
                format!("buffer holds {cap} counts, need {}", curve.len()),
            ));
        }
        slice_mut(counts, curve.len(), "counts")?.copy_from_slice(&curve.n);
        Ok(())
    })
}

/// Omori rate `K (t + tau)^-p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_omori_rate(
    t: f64,
    k: f64,
    p: f64,
    tau: f64,
    out: *mut f64,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = omori_rate(t, k, p, tau).map_err(invalid)?;
        Ok(())
    })
}

/// Cumulative count `N(t)`, continuous across `p = 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_omori_cumulative(
    t: f64,
    k: f64,
    p: f64,
    tau: f64,
    out: *mut f64,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = omori_cumulative(t, k, p, tau).map_err(invalid)?;
        Ok(())
    })
}

/// Small-t slope `K tau^-p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_linear_limit_slope(
    k: f64,
    p: f64,
    tau: f64,
    out: *mut f64,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = linear_limit_slope(k, p, tau).map_err(invalid)?;
        Ok(())
    })
}

/// Least-squares fit of `N(t)` to cumulative counts `n` at times `t`.
///
/// # Safety
/// `t` and `n` must each hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aftershock_fit(
    t: *const f64,
    n: *const f64,
    len: usize,
    out: *mut AftershockFit,
) -> AftershockStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t = slice(t, len, "t")?;
        let n = slice(n, len, "n")?;
        let fit = fit_cumulative(t, n, None, &FitOptions::default())
            .map_err(|e| Failure::new(AftershockStatus::Degenerate, e))?;
        *out = AftershockFit::from(&fit);
        Ok(())
    })
}

/// Simulates an Omori point process on `(0, horizon]` and writes the event
/// count of each unit interval into `counts`, which must hold `horizon`
/// values.
///
/// # Safety
/// `counts` must hold `horizon` writable values.
#[no_mangle]
pub unsafe extern "C" fn aftershock_simulate_counts(
    k: f64,
    p: f64,
    tau: f64,
    horizon: u32,
    seed: u64,
    counts: *mut u32,
) -> AftershockStatus {
    guard(|| {
        let spec = SimSpec {
            k,
            p,
            tau,
            horizon,
            seed,
            mode: SimMode::IntervalCounts,
        };
        let record = simulate_omori_events(&spec).map_err(invalid)?;
        let EventRecord::Counts(c) = record else {
            unreachable!("interval counts requested")
        };
        slice_mut(counts, c.len(), "counts")?.copy_from_slice(&c);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_a_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, AftershockStatus::Panic);
        let msg = unsafe { CStr::from_ptr(aftershock_last_error()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }

    #[test]
    fn messages_with_nul_survive() {
        let st = guard(|| Err(invalid("a\0b")));
        assert_eq!(st, AftershockStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(aftershock_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }

    #[test]
    fn empty_slices_accept_null() {
        assert!(slice::<f64>(std::ptr::null(), 0, "x").unwrap().is_empty());
        assert!(slice::<f64>(std::ptr::null(), 1, "x").is_err());
    }
}
