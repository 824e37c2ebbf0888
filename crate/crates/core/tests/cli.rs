use std::path::Path;
use std::process::{Command, Output};

use gtib::io::{parse_signal_csv, ErrorSummary};

fn gtib(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtib"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, json: &str) {
    std::fs::write(dir.join(name), json).unwrap();
}

fn summary(path: &Path) -> ErrorSummary {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_recover_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = gtib(dir.path(), &["recover", "--out", "a"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["signal.csv", "plan.json", "error.csv", "error.json"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let signal = parse_signal_csv(&std::fs::read_to_string(dir.path().join("a/signal.csv")).unwrap()).unwrap();
    assert_eq!(signal.q.len(), 2001);
    assert_eq!(signal.grid.start, -10.0);
    let s = summary(&dir.path().join("a/error.json"));
    assert!(s.rmse < 1e-4, "{}", s.rmse);
    let errors = std::fs::read_to_string(dir.path().join("a/error.csv")).unwrap();
    assert_eq!(errors.lines().next(), Some("t,epsilon"));
    assert_eq!(errors.lines().count(), 2002);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "c.json",
        r#"{"scenario": {"kind": "two_soliton", "delta": 16}, "grid": {"tau": 0.02}}"#,
    );
    for o in ["x", "y"] {
        assert_eq!(
            code(&gtib(dir.path(), &["recover", "--config", "c.json", "--out", o])),
            0
        );
    }
    for f in ["signal.csv", "plan.json", "error.csv", "error.json"] {
        let a = std::fs::read(dir.path().join("x").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("y").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn two_soliton_no_cuts_fails_quietly_and_cuts_fix_it() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "c.json",
        r#"{"scenario": {"kind": "two_soliton", "delta": 32}, "method": "no_cuts"}"#,
    );
    let out = gtib(dir.path(), &["recover", "--config", "c.json", "--out", "nocut"]);
    assert_eq!(code(&out), 0);
    assert!(summary(&dir.path().join("nocut/error.json")).max > 0.1);
    let out = gtib(
        dir.path(),
        &["recover", "--config", "c.json", "--method", "with_cuts", "--out", "cut"],
    );
    assert_eq!(code(&out), 0);
    assert!(summary(&dir.path().join("cut/error.json")).rmse < 1e-4);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "tau.json",
        r#"{"grid": {"lo": -5, "hi": 5, "M": 100, "tau": 0.2}}"#,
    );
    write_config(dir.path(), "typo.json", r#"{"methd": "no_cuts"}"#);
    write_config(
        dir.path(),
        "missing.json",
        r#"{"scenario": {"kind": "from_spectral_file", "left": "nope.json"}, "grid": {"L": 10}}"#,
    );
    for args in [
        vec!["recover", "--config", "tau.json"],
        vec!["recover", "--config", "typo.json"],
        vec!["recover", "--config", "missing.json"],
        vec!["recover", "--config", "absent.json"],
        vec!["recover", "--method", "sideways"],
        vec!["plan", "--P", "3"],
        vec!["recover", "--M", "1"],
        vec!["recover", "--zone-constant", "-1"],
    ] {
        let out = gtib(dir.path(), &args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn instability_exits_with_three() {
    // a zone wider than the divergence distance lets the march run into the flag
    let dir = tempfile::tempdir().unwrap();
    let out = gtib(
        dir.path(),
        &[
            "recover",
            "--method",
            "left_only",
            "--zone-constant",
            "20",
            "--out",
            "o",
        ],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("segment"));
    // the partial signal is still written
    assert!(dir.path().join("o/signal.csv").exists());
}

#[test]
fn flags_override_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = gtib(dir.path(), &["plan", "--M", "500", "--P", "40", "--out", "p"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p/plan.json")).unwrap()).unwrap();
    assert_eq!(plan["grid"]["len"], 501);
    assert_eq!(plan["h"], 0.08);
    assert_eq!(plan["zone_constant"], 6.0);
    let out = gtib(
        dir.path(),
        &["plan", "--h", "0.05", "--zone-constant", "5", "--out", "q"],
    );
    assert_eq!(code(&out), 0);
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("q/plan.json")).unwrap()).unwrap();
    assert_eq!(plan["grid"]["len"], 801);
    assert_eq!(plan["zone_constant"], 5.0);
}

#[test]
fn sweep_writes_rows_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "four.json", r#"{"h_list": [0.16, 0.08, 0.04, 0.02]}"#);
    let out = gtib(dir.path(), &["sweep", "--config", "four.json", "--out", "s"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<ErrorSummary> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s/sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    let slope = rows[0].slope.unwrap();
    assert!((1.8..=2.2).contains(&slope), "{slope}");
    assert_eq!(
        std::fs::read_to_string(dir.path().join("s/sweep.csv"))
            .unwrap()
            .lines()
            .count(),
        5
    );

    write_config(dir.path(), "one.json", r#"{"h_list": [0.04]}"#);
    assert_eq!(
        code(&gtib(dir.path(), &["sweep", "--config", "one.json", "--out", "t"])),
        0
    );
    let rows: Vec<ErrorSummary> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t/sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].slope.is_none());

    write_config(dir.path(), "up.json", r#"{"h_list": [0.02, 0.04]}"#);
    assert_eq!(code(&gtib(dir.path(), &["sweep", "--config", "up.json"])), 2);
}

#[test]
fn scatter_output_feeds_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let out = gtib(dir.path(), &["scatter", "--M", "4000", "--out", "sc"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    write_config(
        dir.path(),
        "f.json",
        r#"{"scenario": {"kind": "from_spectral_file", "left": "sc/spectral_left.json", "right": "sc/spectral_right.json"},
            "grid": {"lo": -10, "hi": 10, "M": 1000}}"#,
    );
    assert_eq!(
        code(&gtib(dir.path(), &["recover", "--config", "f.json", "--out", "r"])),
        0
    );
    assert_eq!(code(&gtib(dir.path(), &["oracle", "--M", "1000", "--out", "r"])), 0);
    let rec = parse_signal_csv(&std::fs::read_to_string(dir.path().join("r/signal.csv")).unwrap()).unwrap();
    let exact = parse_signal_csv(&std::fs::read_to_string(dir.path().join("r/reference.csv")).unwrap()).unwrap();
    let e = gtib::metrics::pointwise_error(&rec.q, &exact.q).unwrap();
    assert!(gtib::metrics::rmse(&e).unwrap() < 5.0 * 0.02 * 0.02);
}
