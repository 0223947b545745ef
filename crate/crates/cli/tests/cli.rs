use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn svlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const DISCRETE: &str = r#"{
  "schema": "svlab/1",
  "seed": 7,
  "paths": 100,
  "dim": 2,
  "horizon_N": 1000,
  "kernel": {"explicit": [[[-0.5, 0.1], [0.0, -0.4]], 0.1], "tail": {"base": 0.05, "ratio": 0.5}},
  "forcing": {"kind": "geometric", "base": [[1.0], [0.5]], "ratio": 0.9},
  "diffusion": {"kind": "constant", "value": 0.3}
}"#;

#[test]
fn discrete_rows_and_byte_identical_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "d.json", DISCRETE);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let out = svlab(&["simulate-discrete", "--config", &cfg, "--out", dir.to_str().unwrap(), "--threads", threads]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let paths = fs::read_to_string(a.join("paths.csv")).unwrap();
    let mut lines = paths.lines();
    assert_eq!(lines.next(), Some("path_index,n,X_1,X_2"));
    assert_eq!(lines.count(), 100 * 1001);
    for f in ["paths.csv", "partial_sums.csv", "manifest.json", "report.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let r = report(&a);
    // constant diffusion keeps injecting noise
    assert_eq!(r["tail"]["verdict"], "divergent-evidence");
    let entries: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries.iter().filter(|n| n.to_str().unwrap().starts_with("manifest")).count(), 1);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let small = DISCRETE.replace("\"paths\": 100", "\"paths\": 2").replace("1000", "50");
    let cfg = write_config(tmp.path(), "d.json", &small);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    svlab(&["simulate-discrete", "--config", &cfg, "--out", a.to_str().unwrap()]);
    svlab(&["simulate-discrete", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(fs::read(a.join("paths.csv")).unwrap(), fs::read(b.join("paths.csv")).unwrap());
    let m: Value = serde_json::from_str(&fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["master_seed"], 8);
}

#[test]
fn missing_key_is_named_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        r#"{"schema": "svlab/1", "grid": {"horizon_T": 1.0}, "kernel": {"atoms": [{"location": 0, "weight": -1}]}}"#,
    );
    let out = svlab(&["simulate-sve", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.step_h"));

    let cfg = write_config(tmp.path(), "u.json", r#"{"schema": "svlab/1", "function": "zero", "typo": 1}"#);
    let out = svlab(&["check", "cond-f", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo"));
}

#[test]
fn unknown_ids_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"schema": "svlab/1"}"#);
    let out = svlab(&["check", "cond-x", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = svlab(&["reproduce", "no-such-experiment", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_blow_up_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "b.json",
        r#"{"schema": "svlab/1", "horizon_N": 2000, "kernel": {"explicit": [1e3]}, "initial": [1.0]}"#,
    );
    let out = svlab(&["simulate-discrete", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = r#""grid": {"step_h": 0.015625, "horizon_T": 1024}"#;
    let cases = [
        ("cond-f", format!(r#"{{"schema": "svlab/1", "function": "osc(0.1,0.5)", "p": 2, {grid}}}"#), "satisfied-evidence"),
        ("cond-sigma-low", r#"{"schema": "svlab/1", "sigma": "const(1)", "p": 2, "n": 1024}"#.to_string(), "violated-evidence"),
        ("cond-sigma-high", format!(r#"{{"schema": "svlab/1", "sigma": "sqrt-spike", "p": 4, {grid}}}"#), "satisfied-evidence"),
        ("s-epsilon", r#"{"schema": "svlab/1", "sigma": "zero", "eps": [0.1, 1], "n": 256}"#.to_string(), "satisfied-evidence"),
        ("fading", r#"{"schema": "svlab/1", "function": "const(1)", "blocks": [4, 8, 16, 32], "grid": {"step_h": 0.015625, "horizon_T": 32}}"#.to_string(), "violated-evidence"),
        (
            "irregular-windows",
            r#"{"schema": "svlab/1", "function": "spike", "p": 2, "breakpoints": [0, 1, 2.5, 3, 4.2, 5, 6, 7.5, 8, 9], "spacing": {"min": 0.5, "max": 1.5}, "n_min": 2}"#.to_string(),
            "",
        ),
    ];
    for (id, body, want) in cases {
        let cfg = write_config(tmp.path(), &format!("{id}.json"), &body);
        let dir = tmp.path().join(id);
        let out = svlab(&["check", id, "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{id}: {}", String::from_utf8_lossy(&out.stderr));
        if !want.is_empty() {
            assert_eq!(report(&dir)["verdict"], want, "{id}");
        }
        assert!(dir.join("manifest.json").exists());
    }
    let cfg = write_config(
        tmp.path(),
        "lemma.json",
        &format!(r#"{{"schema": "svlab/1", "function": "geometric-window", "p": 0.5, {grid}}}"#),
    );
    let dir = tmp.path().join("lemma");
    assert_eq!(svlab(&["check", "lemma-p-lt-1", "--config", &cfg, "--out", dir.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(report(&dir)["agree"], true);
}

#[test]
fn spacing_violation_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "i.json",
        r#"{"schema": "svlab/1", "function": "spike", "p": 2, "breakpoints": [0, 1, 1.1, 2], "spacing": {"min": 0.5, "max": 1.5}}"#,
    );
    let out = svlab(&["check", "irregular-windows", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1"));
}

#[test]
fn sve_with_ou_coupling_and_gaps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        r#"{"schema": "svlab/1", "seed": 3, "paths": 4, "grid": {"step_h": 0.01, "horizon_T": 10},
            "kernel": {"atoms": [{"location": 0, "weight": -1}]},
            "forcing": "const(1)", "diffusion": "exp-decay", "ou": "euler-maruyama",
            "gap_blocks": [1, 8], "stride": 10}"#,
    );
    let dir = tmp.path().join("o");
    let out = svlab(&["simulate-sve", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir);
    assert_eq!(r["ou"]["max_abs_x_minus_y"], 0.0);
    assert_eq!(r["gap_blocks"].as_array().unwrap().len(), 2);
    let rows = fs::read_to_string(dir.join("paths.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 4 * 101);
    assert!(fs::read_to_string(dir.join("gaps.csv")).unwrap().starts_with("path_index,t,gap\n"));
}

#[test]
fn sfde_and_resolvent_with_scan() {
    let tmp = tempfile::tempdir().unwrap();
    let kernel = r#""kernel": {"delay_tau": 1, "atoms": [{"location": -1, "weight": -0.5}]}"#;
    let cfg = write_config(
        tmp.path(),
        "f.json",
        &format!(r#"{{"schema": "svlab/1", "grid": {{"step_h": 0.001, "horizon_T": 2}}, {kernel}, "history": "const(1)"}}"#),
    );
    let dir = tmp.path().join("sfde");
    assert_eq!(svlab(&["simulate-sfde", "--config", &cfg, "--out", dir.to_str().unwrap()]).status.code(), Some(0));
    let text = fs::read_to_string(dir.join("paths.csv")).unwrap();
    let x1: f64 = text
        .lines()
        .find(|l| l.starts_with("0,1,"))
        .and_then(|l| l.rsplit(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((x1 - 0.5).abs() < 2e-3);
    assert!(text.lines().nth(1).unwrap().starts_with("0,-1,"));

    let cfg = write_config(
        tmp.path(),
        "r.json",
        &format!(
            r#"{{"schema": "svlab/1", "grid": {{"step_h": 0.01, "horizon_T": 3}}, {kernel},
                "scan": {{"re_min": -3, "re_max": 3, "im_max": 10}}}}"#
        ),
    );
    let dir = tmp.path().join("res");
    for hit in [false, true] {
        assert_eq!(svlab(&["resolvent", "--config", &cfg, "--out", dir.to_str().unwrap()]).status.code(), Some(0));
        let r = report(&dir);
        assert_eq!(r["cache_hit"], hit);
        assert_eq!(r["scan"]["verdict"], "stable");
    }
    assert!(fs::read_to_string(dir.join("resolvent.csv")).unwrap().starts_with("k,t,r_11\n"));

    let cfg = write_config(
        tmp.path(),
        "k.json",
        r#"{"schema": "svlab/1", "discrete_kernel": {"explicit": [-0.5]}, "horizon_N": 10}"#,
    );
    let dir = tmp.path().join("seq");
    assert_eq!(svlab(&["resolvent", "--config", &cfg, "--out", dir.to_str().unwrap()]).status.code(), Some(0));
    let text = fs::read_to_string(dir.join("resolvent.csv")).unwrap();
    assert_eq!(text.lines().nth(3), Some("2,0.25"));
}

#[test]
fn sweep_over_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "w.json",
        r#"{"schema": "svlab/1", "command": "check", "check_id": "cond-sigma-low", "parameter": "sigma",
            "values": ["zero", "const(1)"],
            "base": {"schema": "svlab/1", "p": 2, "n": 256}}"#,
    );
    let dir = tmp.path().join("sweep");
    let out = svlab(&["sweep", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(csv.contains("satisfied-evidence") && csv.contains("violated-evidence"), "{csv}");
    assert!(dir.join("run-001").join("manifest.json").exists());
}

#[test]
fn reproduce_writes_tables() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ["spike-windows", "ou-embedding", "resolvent-exp"] {
        let dir = tmp.path().join(id);
        let out = svlab(&["reproduce", id, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let t: Value = serde_json::from_str(&fs::read_to_string(dir.join("table.json")).unwrap()).unwrap();
        assert_eq!(t["pass"], true, "{id}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    }
    let rows = fs::read_to_string(tmp.path().join("spike-windows/table.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 99);
}
