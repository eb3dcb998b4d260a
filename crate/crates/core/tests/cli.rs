use std::fs;
use std::process::{Command, Output};

fn wppan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wppan"))
        .args(args)
        .env("WPPAN_THREADS", "1")
        .output()
        .expect("spawn wppan")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(wppan(&["--help"]).status.code(), Some(0));
    assert_eq!(wppan(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_arguments_are_config_errors() {
    assert_eq!(
        wppan(&["run", "--mode", "bogus", "--trials", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(wppan(&["run"]).status.code(), Some(1));
    assert_eq!(
        wppan(&["sweep", "--axis", "height", "--grid", "1", "--out", "x.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(wppan(&["nonsense"]).status.code(), Some(1));
}

#[test]
fn invalid_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, r#"{"num_users": 0}"#).unwrap();
    let out = wppan(&[
        "run",
        "--mode",
        "naive",
        "--trials",
        "1",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = wppan(&[
        "run",
        "--mode",
        "naive",
        "--trials",
        "1",
        "--config",
        "/nonexistent/cfg.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("out.csv");
    let out = wppan(&[
        "run",
        "--mode",
        "naive",
        "--trials",
        "1",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_writes_one_row_per_trial() {
    let out = wppan(&["run", "--system", "miso", "--trials", "4", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("trial,mode,min_rate"));
    assert!(lines[1..].iter().all(|l| l.contains(",miso,")));
}

#[test]
fn sweep_writes_csv_and_dat() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p0.csv");
    let out = wppan(&[
        "sweep",
        "--axis",
        "p0_dbm",
        "--grid",
        "30,40",
        "--modes",
        "greedy,naive",
        "--trials",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("p0_dbm,trials,greedy_mean"));

    let dat = dir.path().join("p0.dat");
    let out = wppan(&[
        "sweep",
        "--axis",
        "users",
        "--grid",
        "2,3",
        "--modes",
        "naive",
        "--trials",
        "2",
        "--format",
        "dat",
        "--out",
        dat.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(dir.path().join("p0_naive.dat").exists());
}

#[test]
fn hist_writes_both_links() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    let out = wppan(&[
        "hist",
        "--trials",
        "5",
        "--out",
        path.to_str().unwrap(),
        "--weighting",
        "duration",
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("active,downlink,uplink"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn large_search_problems_warn() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, r#"{"num_antennas": 10, "num_users": 2}"#).unwrap();
    let out = wppan(&[
        "run",
        "--mode",
        "search",
        "--trials",
        "1",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn seed_changes_output() {
    let a = wppan(&["run", "--mode", "naive", "--trials", "3", "--seed", "1"]).stdout;
    let b = wppan(&["run", "--mode", "naive", "--trials", "3", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}
