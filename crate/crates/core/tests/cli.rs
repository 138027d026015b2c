use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aftershock"));
    cmd.env_remove("AFTERSHOCK_OUT_DIR");
    cmd
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_minute_bars(path: &Path, skip: &[usize]) {
    let mut text = String::from("date,time,price\n");
    let mut level = 100.0;
    for (i, m) in (31..=59).enumerate() {
        level += 0.1;
        if !skip.contains(&i) {
            text.push_str(&format!("2001-02-05,09:{m},{level:.1}\n"));
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn validate_clean_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bars.csv");
    write_minute_bars(&input, &[]);
    let out = bin()
        .args(["validate", "-i"])
        .arg(&input)
        .arg("-o")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validation.json")).unwrap())
            .unwrap();
    assert_eq!(report["parse"]["accepted"], 29);
    // the clean file covers only part of one day; the rest of the day is gaps
    assert_eq!(report["validation"]["day_count"], 1);
}

#[test]
fn validate_reports_deleted_rows_as_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.csv");
    let holed = dir.path().join("holed.csv");
    write_minute_bars(&clean, &[]);
    write_minute_bars(&holed, &[3, 4, 10]);
    let gaps = |input: &Path, out: &Path| {
        let o = bin()
            .args(["validate", "-i"])
            .arg(input)
            .arg("-o")
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap())
                .unwrap();
        v["validation"]["gap_count"].as_u64().unwrap()
    };
    let before = gaps(&clean, &dir.path().join("a"));
    let after = gaps(&holed, &dir.path().join("b"));
    assert_eq!(after, before + 3);
}

#[test]
fn truncated_header_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "date,ti").unwrap();
    let out = bin()
        .args(["validate", "-i"])
        .arg(&input)
        .arg("-o")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("header"));
}

#[test]
fn malformed_config_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "thresholds = [0.9, 0.6]\n").unwrap();
    let out = bin().args(["analyze", "-c"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bin().output().unwrap()), 1);
    assert_eq!(
        code(&bin().args(["analyze", "--k", "x"]).output().unwrap()),
        1
    );
    assert_eq!(code(&bin().args(["--help"]).output().unwrap()), 0);
}

#[test]
fn simulate_is_byte_identical_and_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    fs::write(
        &cfg,
        "[simulate.omori]\nK = 30.0\np = 1.2\ntau = 5.0\nhorizon = 60\nseed = 1\nmode = \"event-times\"\n",
    )
    .unwrap();
    let run = |out: &str| {
        let o = bin()
            .args(["simulate", "--seed", "42", "-c"])
            .arg(&cfg)
            .arg("-o")
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read(dir.path().join(out).join("synthetic.csv")).unwrap(),
            fs::read_to_string(dir.path().join(out).join("truth.json")).unwrap(),
        )
    };
    let (a, truth) = run("a");
    let (b, _) = run("b");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time"));
    let times: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    let truth: serde_json::Value = serde_json::from_str(&truth).unwrap();
    assert_eq!(truth["events"].as_u64().unwrap() as usize, times.len());
    assert_eq!(truth["spec"]["seed"], 42);
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn analyze_fixture_and_degenerate_exit() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let out = bin()
        .args(["analyze", "-c"])
        .arg(fx.join("planted.toml"))
        .arg("-i")
        .arg(fx.join("planted.csv.gz"))
        .arg("-o")
        .arg(dir.path().join("ok"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let golden = fx.parent().unwrap().join("golden");
    for name in ["shocks.csv", "sweep.csv", "volatility.csv"] {
        assert_eq!(
            fs::read(dir.path().join("ok").join(name)).unwrap(),
            fs::read(golden.join(name)).unwrap(),
            "{name}"
        );
    }

    let out = bin()
        .args(["analyze", "--thresholds", "100", "-i"])
        .arg(fx.join("planted.csv.gz"))
        .arg("-o")
        .arg(dir.path().join("degenerate"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let sweep = fs::read_to_string(dir.path().join("degenerate/sweep.csv")).unwrap();
    assert!(sweep
        .lines()
        .skip(1)
        .all(|l| l.ends_with("degenerate_constant")));
}

#[test]
fn env_var_sets_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bars.csv");
    write_minute_bars(&input, &[]);
    let target = dir.path().join("from-env");
    let out = bin()
        .env("AFTERSHOCK_OUT_DIR", &target)
        .args(["validate", "-i"])
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(target.join("validation.json").exists());

    // an explicit flag wins over the environment
    let flag = dir.path().join("from-flag");
    bin()
        .env("AFTERSHOCK_OUT_DIR", &target)
        .args(["validate", "-i"])
        .arg(&input)
        .arg("-o")
        .arg(&flag)
        .output()
        .unwrap();
    assert!(flag.join("validation.json").exists());
}
