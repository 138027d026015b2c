use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use aftershock_ffi::*;

fn last_error() -> String {
    let p = aftershock_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/planted.csv.gz")
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(aftershock_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_buffer_and_bad_header() {
    let text = b"date,time,price\n2001-02-05,09:31,100\n2001-02-05,09:32,101\n";
    let mut series = ptr::null_mut();
    let st = unsafe {
        aftershock_series_parse_buffer(
            text.as_ptr(),
            text.len(),
            AftershockFormat::MinuteBars,
            &mut series,
        )
    };
    assert_eq!(st, AftershockStatus::Ok);
    assert_eq!(unsafe { aftershock_series_len(series) }, 2);
    assert_eq!(unsafe { aftershock_series_day_count(series) }, 1);
    unsafe { aftershock_series_free(series) };

    let bad = b"date,ti";
    let mut untouched = ptr::null_mut();
    let st = unsafe {
        aftershock_series_parse_buffer(
            bad.as_ptr(),
            bad.len(),
            AftershockFormat::MinuteBars,
            &mut untouched,
        )
    };
    assert_eq!(st, AftershockStatus::Parse);
    assert!(untouched.is_null());
    assert!(last_error().contains("header"));
}

#[test]
fn null_and_missing_inputs() {
    let st = unsafe {
        aftershock_series_parse_file(ptr::null(), AftershockFormat::MinuteBars, ptr::null_mut())
    };
    assert_eq!(st, AftershockStatus::NullPointer);

    let path = CString::new("/nonexistent/prices.csv").unwrap();
    let mut series = ptr::null_mut();
    let st = unsafe {
        aftershock_series_parse_file(path.as_ptr(), AftershockFormat::MinuteBars, &mut series)
    };
    assert_eq!(st, AftershockStatus::Io);
    assert!(series.is_null());

    // freeing NULL is a no-op
    unsafe {
        aftershock_series_free(ptr::null_mut());
        aftershock_volatility_free(ptr::null_mut());
        aftershock_shocks_free(ptr::null_mut());
    }
    assert_eq!(unsafe { aftershock_series_len(ptr::null()) }, 0);
}

#[test]
fn fixture_pipeline_finds_the_planted_shocks() {
    let path = CString::new(fixture().to_str().unwrap()).unwrap();
    let mut series = ptr::null_mut();
    assert_eq!(
        unsafe {
            aftershock_series_parse_file(path.as_ptr(), AftershockFormat::MinuteBars, &mut series)
        },
        AftershockStatus::Ok
    );
    assert_eq!(unsafe { aftershock_series_day_count(series) }, 160);

    let mut vols = ptr::null_mut();
    assert_eq!(
        unsafe {
            aftershock_volatility_compute(series, AftershockAggregation::Daily, true, &mut vols)
        },
        AftershockStatus::Ok
    );
    let len = unsafe { aftershock_volatility_len(vols) };
    assert_eq!(len, 160);

    let mut need = 0;
    let mut small = [0.0; 4];
    assert_eq!(
        unsafe { aftershock_volatility_values(vols, small.as_mut_ptr(), small.len(), &mut need) },
        AftershockStatus::BufferTooSmall
    );
    assert_eq!(need, len);
    let mut values = vec![0.0; need];
    assert_eq!(
        unsafe { aftershock_volatility_values(vols, values.as_mut_ptr(), values.len(), &mut need) },
        AftershockStatus::Ok
    );

    let mut sigma = 0.0;
    assert_eq!(
        unsafe {
            aftershock_volatility_sigma(vols, AftershockSigmaKind::StandardDeviation, &mut sigma)
        },
        AftershockStatus::Ok
    );
    assert!(sigma > 0.0);

    let mut list = ptr::null_mut();
    assert_eq!(
        unsafe { aftershock_detect_shocks(vols, 0, 0, 0, &mut list) },
        AftershockStatus::Ok
    );
    let n = unsafe { aftershock_shocks_len(list) };
    let mut t0s = Vec::new();
    for i in 0..n {
        let mut s = AftershockShock::default();
        assert_eq!(
            unsafe { aftershock_shocks_get(list, i, &mut s) },
            AftershockStatus::Ok
        );
        assert!(s.t1 > s.t0);
        assert_eq!(s.v_max, values[s.t0]);
        t0s.push(s.t0);
    }
    assert!(t0s.contains(&30) && t0s.contains(&95), "{t0s:?}");

    let mut s = AftershockShock::default();
    assert_eq!(
        unsafe { aftershock_shocks_get(list, n, &mut s) },
        AftershockStatus::IndexOutOfRange
    );

    let first = t0s.iter().position(|&t| t == 30).unwrap();
    let mut counts = vec![0u32; 200];
    let mut written = 0;
    assert_eq!(
        unsafe {
            aftershock_count(
                vols,
                list,
                first,
                1.5 * sigma,
                counts.as_mut_ptr(),
                counts.len(),
                &mut written,
            )
        },
        AftershockStatus::Ok
    );
    let counts = &counts[..written];
    assert!(counts.windows(2).all(|w| w[1] >= w[0]));

    unsafe {
        aftershock_shocks_free(list);
        aftershock_volatility_free(vols);
        aftershock_series_free(series);
    }
}

#[test]
fn model_functions_and_errors() {
    let mut v = 0.0;
    assert_eq!(
        unsafe { aftershock_omori_rate(0.0, 2.0, 1.0, 4.0, &mut v) },
        AftershockStatus::Ok
    );
    assert_eq!(v, 0.5);
    let mut slope = 0.0;
    assert_eq!(
        unsafe { aftershock_linear_limit_slope(2.0, 1.0, 4.0, &mut slope) },
        AftershockStatus::Ok
    );
    assert_eq!(slope, v);
    assert_eq!(
        unsafe { aftershock_omori_cumulative(10.0, 3.0, 1.0, 2.0, &mut v) },
        AftershockStatus::Ok
    );
    assert!((v - 3.0 * 6f64.ln()).abs() < 1e-12);

    assert_eq!(
        unsafe { aftershock_omori_rate(1.0, 1.0, 1.0, -1.0, &mut v) },
        AftershockStatus::InvalidArgument
    );
    assert!(!last_error().is_empty());
}

#[test]
fn fit_recovers_noiseless_curve() {
    let t: Vec<f64> = (1..=60).map(f64::from).collect();
    let mut n = Vec::new();
    for &x in &t {
        let mut y = 0.0;
        assert_eq!(
            unsafe { aftershock_omori_cumulative(x, 30.0, 1.3, 5.0, &mut y) },
            AftershockStatus::Ok
        );
        n.push(y);
    }
    let mut fit = AftershockFit::default();
    assert_eq!(
        unsafe { aftershock_fit(t.as_ptr(), n.as_ptr(), t.len(), &mut fit) },
        AftershockStatus::Ok
    );
    assert!((fit.p - 1.3).abs() < 1e-6, "{fit:?}");
    assert!((fit.tau - 5.0).abs() < 1e-5, "{fit:?}");

    let flat = [2.0; 10];
    assert_eq!(
        unsafe { aftershock_fit(t.as_ptr(), flat.as_ptr(), flat.len(), &mut fit) },
        AftershockStatus::Degenerate
    );
}

#[test]
fn simulation_is_seeded() {
    let mut a = vec![0u32; 50];
    let mut b = vec![0u32; 50];
    for buf in [&mut a, &mut b] {
        assert_eq!(
            unsafe { aftershock_simulate_counts(20.0, 1.2, 3.0, 50, 9, buf.as_mut_ptr()) },
            AftershockStatus::Ok
        );
    }
    assert_eq!(a, b);
    assert!(a.iter().sum::<u32>() > 0);
    assert_eq!(
        unsafe { aftershock_simulate_counts(-1.0, 1.2, 3.0, 50, 9, a.as_mut_ptr()) },
        AftershockStatus::InvalidArgument
    );
}

#[test]
fn volatility_from_values_drives_detection() {
    let mut v = vec![1.0; 120];
    v[40] = 9.0;
    v[45] = 0.5;
    let mut vols = ptr::null_mut();
    assert_eq!(
        unsafe { aftershock_volatility_from_values(v.as_ptr(), v.len(), &mut vols) },
        AftershockStatus::Ok
    );
    let mut list = ptr::null_mut();
    assert_eq!(
        unsafe { aftershock_detect_shocks(vols, 1, 0, 0, &mut list) },
        AftershockStatus::Ok
    );
    let mut s = AftershockShock::default();
    assert_eq!(
        unsafe { aftershock_shocks_get(list, 0, &mut s) },
        AftershockStatus::Ok
    );
    assert_eq!((s.t0, s.t1), (40, 45));

    let bad = [1.0, f64::NAN];
    let mut other = ptr::null_mut();
    assert_eq!(
        unsafe { aftershock_volatility_from_values(bad.as_ptr(), bad.len(), &mut other) },
        AftershockStatus::InvalidArgument
    );
    unsafe {
        aftershock_shocks_free(list);
        aftershock_volatility_free(vols);
    }
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include "aftershock.h"

int main(void) {
    double r = 0.0;
    if (aftershock_omori_rate(0.0, 2.0, 1.0, 4.0, &r) != AFTERSHOCK_STATUS_OK || r != 0.5) return 1;
    if (aftershock_omori_rate(1.0, 1.0, 1.0, -1.0, &r) != AFTERSHOCK_STATUS_INVALID_ARGUMENT) return 2;
    if (aftershock_last_error() == NULL) return 3;
    const char csv[] = "date,time,price\n2001-02-05,09:31,100\n2001-02-05,09:32,101\n";
    AftershockPriceSeries *s = NULL;
    if (aftershock_series_parse_buffer((const uint8_t *)csv, sizeof csv - 1,
                                       AFTERSHOCK_FORMAT_MINUTE_BARS, &s) != AFTERSHOCK_STATUS_OK) return 4;
    if (aftershock_series_len(s) != 2) return 5;
    aftershock_series_free(s);
    printf("%s\n", aftershock_version());
    return 0;
}
"#;

/// Compiles a small C program against the generated header and the static
/// library. Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_against_header_and_staticlib() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libaftershock_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, C_SMOKE).unwrap();
    let out = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(
        String::from_utf8_lossy(&run.stdout).trim(),
        env!("CARGO_PKG_VERSION")
    );
}
