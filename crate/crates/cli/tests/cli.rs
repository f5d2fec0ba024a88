use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pairkey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairkey")).args(args).output().expect("spawn pairkey")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn meta<'a>(csv: &'a str, key: &str) -> Option<&'a str> {
    csv.lines().find_map(|l| l.strip_prefix(&format!("# {key}: ")))
}

#[test]
fn fig3_has_the_plotted_columns() {
    let out = stdout(&pairkey(&["fig3", "--samples", "2000"]));
    let rows = data_lines(&out);
    assert_eq!(
        rows[0],
        [
            "sigma2_12",
            "inner_r12",
            "outer_r12",
            "inner_r13",
            "outer_r13",
            "inner_r12_se",
            "outer_r12_se",
            "inner_r13_se",
            "outer_r13_se"
        ]
    );
    assert_eq!(rows.len(), 7);
    for r in &rows[1..] {
        let v: Vec<f64> = r.iter().map(|c| c.parse().unwrap()).collect();
        assert!(v[1] <= v[2] && v[3] <= v[4], "{r:?}");
    }
    assert_eq!(meta(&out, "log_base"), Some("2"));
    assert_eq!(meta(&out, "samples"), Some("2000"));
    assert!(meta(&out, "config_sha256").is_some_and(|h| h.len() == 64));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = pairkey(&["fig3", "--seed", "42", "--samples", "3000", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.csv");
    pairkey(&["fig3", "--seed", "43", "--samples", "3000", "--out", c.to_str().unwrap()]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let one = stdout(&pairkey(&["thm2", "--samples", "5000", "--threads", "1"]));
    let four = stdout(&pairkey(&["thm2", "--samples", "5000", "--threads", "4"]));
    assert_eq!(one, four);
}

#[test]
fn malformed_config_exits_2() {
    let dir = TempDir::new().unwrap();
    for text in [
        "{ not json",
        r#"{"mc": {"samples": 100, "colour": 1}}"#,
        r#"{"noise": {"sigma2_12": -1}}"#,
        r#"{"sweep": {"parameter": "sigma2_99", "grid": [0.1]}}"#,
    ] {
        let p = write(&dir, "bad.json", text);
        let o = pairkey(&["thm2", "--config", &p]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!o.stderr.is_empty());
    }
    let missing = dir.path().join("nope.json");
    let o = pairkey(&["thm2", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_axes_exit_2() {
    let o = pairkey(&["region", "--axes", "R12-R12", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("axes"));
}

#[test]
fn unlimited_budgets_give_a_single_corner() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "region.json",
        r#"{"budgets": {"r1": "inf", "r2": "inf", "r3": "inf"},
            "mc": {"samples": 2000},
            "region": {"axes": "R12-R13", "split_grid": [0, 1, "inf"], "refine_samples": 4000}}"#,
    );
    let out = stdout(&pairkey(&["region", "--config", &p]));
    let rows = data_lines(&out);
    let frontier = rows[0].iter().position(|c| c == "frontier").unwrap();
    let corners: Vec<&Vec<String>> = rows[1..].iter().filter(|r| r[frontier] == "true").collect();
    assert_eq!(corners.len(), 1, "{out}");
    let sp: Vec<f64> = corners[0][corners[0].len() - 6..].iter().map(|c| c.parse().unwrap()).collect();
    assert!(sp.iter().all(|&v| v == 0.0), "{sp:?}");
    assert_eq!(meta(&out, "combinations"), Some("729"));
}

#[test]
fn thm2_outer_thm3_emit_json() {
    for cmd in ["thm2", "outer", "thm3-point"] {
        let v: Value = serde_json::from_str(&stdout(&pairkey(&[cmd, "--samples", "1000", "--format", "json"])))
            .unwrap_or_else(|e| panic!("{cmd}: {e}"));
        assert_eq!(v["meta"]["command"], cmd);
        assert!(v["data"].as_array().is_some_and(|a| !a.is_empty()));
    }
}

#[test]
fn outer_dominates_thm2() {
    let inner: Value = serde_json::from_str(&stdout(&pairkey(&["thm2", "--samples", "4000", "--format", "json"]))).unwrap();
    let outer: Value = serde_json::from_str(&stdout(&pairkey(&["outer", "--samples", "4000", "--format", "json"]))).unwrap();
    for k in 0..3 {
        assert!(inner["data"][k]["inner"].as_f64().unwrap() <= outer["data"][k]["outer"].as_f64().unwrap());
    }
}

fn discrete(dir: &TempDir, section: &str, extra: &[&str]) -> Output {
    let p = write(dir, "d.json", &format!(r#"{{"discrete": {section}}}"#));
    let mut args = vec!["discrete", "--config", &p];
    args.extend_from_slice(extra);
    pairkey(&args)
}

#[test]
fn discrete_binary_copy() {
    let dir = TempDir::new().unwrap();
    // X1 = X2 uniform bit, X3 independent: S12 copies X1 and everything
    // else is constant.
    let o = discrete(
        &dir,
        r#"{"alphabets": [2, 2, 2],
            "pmf": [0.25, 0.25, 0, 0, 0, 0, 0.25, 0.25],
            "channels": {"12": [[1, 0], [0, 1]]},
            "query": {"rates": [0, 0, 0]}}"#,
        &["--format", "json"],
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["data"]["r"];
    assert!((r["r12"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{r}");
    for k in ["r13", "r21", "r23", "r31", "r32"] {
        assert!(r[k].as_f64().unwrap().abs() < 1e-12, "{k}");
    }
    assert_eq!(v["data"]["query"]["member"], true);
}

#[test]
fn discrete_constant_channels_are_zero() {
    let dir = TempDir::new().unwrap();
    let o = discrete(
        &dir,
        r#"{"alphabets": [2, 2, 2], "pmf": [0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1]}"#,
        &[],
    );
    let out = stdout(&o);
    for row in &data_lines(&out)[1..] {
        let v: f64 = row[1].parse().unwrap();
        assert!(v.abs() < 1e-12 || row[0].starts_with("region") || row[0].starts_with("public"), "{row:?}");
        if row[0].starts_with('r') && !row[0].starts_with("region") {
            assert!(v.abs() < 1e-12, "{row:?}");
        }
    }
}

#[test]
fn discrete_rejects_non_stochastic_rows() {
    let dir = TempDir::new().unwrap();
    let o = discrete(
        &dir,
        r#"{"alphabets": [2, 2, 2],
            "pmf": [0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125],
            "channels": {"21": [[0.5, 0.5], [0.7, 0.7]]}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("channel 21") && err.contains('1'), "{err}");
}

#[test]
fn selftest_passes() {
    let o = pairkey(&["selftest", "--samples", "500"]);
    let out = stdout(&o);
    assert!(data_lines(&out)[1..].iter().all(|r| r[2] == "true"));
}

#[test]
fn help_lists_commands() {
    let out = stdout(&pairkey(&["--help"]));
    for c in ["fig3", "region", "thm2", "outer", "thm3-point", "discrete", "selftest"] {
        assert!(out.contains(c), "{c}");
    }
}
