use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hetwsn::report::{read_series, COMPARISON_HEADER, SUMMARY_HEADER, SWEEP_HEADER};

fn hetwsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetwsn"))
        .args(args)
        .output()
        .expect("failed to launch hetwsn")
}

fn csv_files(dir: &Path, prefix: &str) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with(prefix) && n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

#[test]
fn run_writes_series_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = hetwsn(&["run", "--out", out.to_str().unwrap(), "--seed", "3", "--protocol", "sep", "--set", "n=30"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.contains("FND"));
    assert!(stdout.contains("effective d0 87.7058"));

    let series = read_series(&out.join("series_sep_seed3.csv")).unwrap();
    assert!(!series.is_empty());
    let echo = fs::read_to_string(out.join("effective_config.toml")).unwrap();
    assert!(echo.contains("protocol = \"sep\""));
    assert!(echo.contains("seed = 3"));
    assert!(echo.contains("# effective d0 = 87.70580"));

    // re-running from the echoed config reproduces the output byte for byte
    let again = dir.path().join("again");
    let status = hetwsn(&[
        "run",
        "--config",
        out.join("effective_config.toml").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    for name in ["series_sep_seed3.csv", "summary.csv", "effective_config.toml"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn compare_single_seed_file_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let status = hetwsn(&["compare", "--out", out.to_str().unwrap(), "--seeds", "1..1", "--set", "n=30"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let table = String::from_utf8(status.stdout).unwrap();
    for name in ["LEACH", "SEP", "DBCP"] {
        assert!(table.contains(name));
    }

    assert_eq!(
        csv_files(&out, "series_"),
        vec!["series_dbcp_seed1.csv", "series_leach_seed1.csv", "series_sep_seed1.csv"]
    );
    assert_eq!(csv_files(&out, "comparison"), vec!["comparison.csv"]);
    let comparison = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(comparison.lines().next().unwrap(), COMPARISON_HEADER);
    assert_eq!(comparison.lines().count(), 1 + 3 * 4);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), SUMMARY_HEADER);
    assert_eq!(summary.lines().count(), 4);
    assert!(out.join("curves.csv").exists());

    let again = dir.path().join("again");
    let status = hetwsn(&[
        "compare",
        "--config",
        out.join("effective_config.toml").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
        "--seeds",
        "1..1",
    ]);
    assert!(status.status.success());
    for name in ["comparison.csv", "summary.csv", "curves.csv", "series_dbcp_seed1.csv"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn compare_into_unwritable_dir_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("cmp");
    let status = hetwsn(&["compare", "--out", out.to_str().unwrap(), "--seeds", "1..1", "--set", "n=10"]);
    assert!(!status.status.success());
    assert!(!out.join("comparison.csv").exists());
    assert!(String::from_utf8_lossy(&status.stderr).contains("error"));
}

#[test]
fn invalid_configuration_is_reported() {
    let status = hetwsn(&["run", "--out", "/nonexistent/never", "--set", "m=0.1", "--set", "m0=0.2"]);
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("`m0`"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "n = 10\nrounds = 4\n").unwrap();
    let status = hetwsn(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("rounds"));
}

fn sweep_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_three_values_ten_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let status = hetwsn(&[
        "sweep", "--out", out.to_str().unwrap(), "--param", "m", "--values", "0.1,0.2,0.3", "--seeds", "1..10",
        "--set", "n=30",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(csv_files(&out, ""), vec!["sweep.csv"]);
    let rows = sweep_rows(&out.join("sweep.csv"));
    // 3 values x 3 protocols x 4 metrics
    assert_eq!(rows.len(), 36);
    let batches: std::collections::BTreeSet<(String, String)> =
        rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    assert_eq!(batches.len(), 9);
}

#[test]
fn sweep_homogeneous_point_sep_equals_leach() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let status = hetwsn(&[
        "sweep", "--out", out.to_str().unwrap(), "--param", "m", "--values", "0", "--seeds", "1..3", "--set", "m0=0",
        "--set", "n=30",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let rows = sweep_rows(&out.join("sweep.csv"));
    let stats = |protocol: &str| -> Vec<(String, String, String)> {
        rows.iter()
            .filter(|r| r[1] == protocol)
            .map(|r| (r[2].clone(), r[3].clone(), r[4].clone()))
            .collect()
    };
    assert_eq!(stats("leach"), stats("sep"));
}

#[test]
fn sweep_with_energy_identical_tiers() {
    // first sweep a down to 0, then with a = 0 sweep b down to 0; at that
    // point every tier starts with e0 and the weighted probabilities all
    // collapse to p_opt, so SEP reproduces LEACH exactly
    let dir = tempfile::tempdir().unwrap();
    let a_out = dir.path().join("a");
    let status = hetwsn(&[
        "sweep", "--out", a_out.to_str().unwrap(), "--param", "a", "--values", "0", "--seeds", "1..3", "--set", "n=30",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let b_out = dir.path().join("b");
    let status = hetwsn(&[
        "sweep", "--out", b_out.to_str().unwrap(), "--param", "b", "--values", "0", "--seeds", "1..3", "--set", "a=0",
        "--set", "n=30",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let rows = sweep_rows(&b_out.join("sweep.csv"));
    let stats = |protocol: &str| -> Vec<Vec<String>> {
        rows.iter().filter(|r| r[1] == protocol).map(|r| r[2..].to_vec()).collect()
    };
    assert_eq!(stats("leach"), stats("sep"));

    let rows = sweep_rows(&a_out.join("sweep.csv"));
    assert_eq!(rows.len(), 12);
}

#[test]
fn sweep_rejects_out_of_range_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    // m below the default m0 = 0.1
    let status = hetwsn(&["sweep", "--out", out.to_str().unwrap(), "--param", "m", "--values", "0.05", "--seeds", "1..1"]);
    assert!(!status.status.success());
    assert!(!out.join("sweep.csv").exists());
}
