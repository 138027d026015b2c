//! Byte-exact regression of the analyze artifacts on the bundled planted
//! fixture. Set `UPDATE_GOLDEN=1` to rewrite the golden files after an
//! intentional output change.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use aftershock::config::{PipelineConfig, SimulateConfig};
use aftershock::ingest::{open_input, TradingCalendar};
use aftershock::pipeline::run_analyze;
use aftershock::simulate::synthetic_price_series;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture_config(out: &Path) -> PipelineConfig {
    let dir = manifest_dir().join("tests/fixtures");
    let mut cfg = PipelineConfig::load(&dir.join("planted.toml")).unwrap();
    cfg.input = Some(dir.join("planted.csv.gz"));
    cfg.output_dir = Some(out.to_path_buf());
    cfg
}

/// Relative path and contents of every file under `root`, sorted by path.
fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn analyze_matches_golden_twice() {
    let golden = manifest_dir().join("tests/golden");
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run_analyze(&fixture_config(first.path())).unwrap();
    run_analyze(&fixture_config(second.path())).unwrap();

    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let _ = fs::remove_dir_all(&golden);
        for (rel, bytes) in tree(first.path()) {
            let path = golden.join(rel);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, bytes).unwrap();
        }
    }

    let want = tree(&golden);
    let a = tree(first.path());
    let b = tree(second.path());
    assert_eq!(a, b, "two runs differ");
    let names = |t: &[(String, Vec<u8>)]| t.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    assert_eq!(names(&a), names(&want));
    for ((name, got), (_, exp)) in a.iter().zip(&want) {
        assert!(got == exp, "{name} differs from golden");
    }
}

#[test]
fn golden_shocks_are_the_planted_days() {
    let shocks = fs::read_to_string(manifest_dir().join("tests/golden/shocks.csv")).unwrap();
    let t0: Vec<&str> = shocks
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    // trading days 30 and 95 counted from Monday 2001-02-05
    assert_eq!(t0, ["2001-03-19", "2001-06-18"]);
    let sweep = fs::read_to_string(manifest_dir().join("tests/golden/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 2 * 3);
}

#[test]
fn fixture_regenerates_from_its_config() {
    let dir = manifest_dir().join("tests/fixtures");
    let cfg = PipelineConfig::load(&dir.join("planted.toml")).unwrap();
    let Some(SimulateConfig::Planted(spec)) = cfg.simulate else {
        panic!("fixture config lacks a planted spec")
    };
    let planted = synthetic_price_series(&spec, &TradingCalendar::default()).unwrap();
    let mut bundled = String::new();
    open_input(&dir.join("planted.csv.gz"))
        .unwrap()
        .read_to_string(&mut bundled)
        .unwrap();
    assert!(
        planted.series.to_csv_string() == bundled,
        "fixture drifted from its generator"
    );
}
