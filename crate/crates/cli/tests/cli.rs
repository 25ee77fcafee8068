use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauss-spectra"))
        .args(args)
        .env_remove("GAUSS_SPECTRA_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parses the CSV layout: metadata comments, header, rows, trailing comments.
fn read_csv(text: &str) -> (Vec<(String, String)>, Vec<String>, Vec<Vec<String>>) {
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once('=').unwrap();
            meta.push((k.to_string(), v.to_string()));
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (meta, header, rows)
}

fn meta<'a>(meta: &'a [(String, String)], key: &str) -> &'a str {
    &meta.iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn pressure_at_the_gauss_point() {
    let o = run(&["pressure", "--t", "1", "--q", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let (m, header, rows) = read_csv(&stdout(&o));
    assert_eq!(meta(&m, "cutoff"), "64");
    assert_eq!(meta(&m, "collocation_order"), "16");
    assert_eq!(header, ["t", "q", "pressure", "dp_dt", "dp_dq", "tail_error"]);
    let p: f64 = rows[0][2].parse().unwrap();
    assert!(p.abs() < 1e-10);
}

#[test]
fn pressure_boundary_and_sweep() {
    let o = run(&["pressure", "--t", "0", "--q", "-2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = v["rows"][0]["pressure"].as_f64().unwrap();
    assert!((p - (std::f64::consts::PI.powi(2) / 6.0).ln()).abs() < 1e-10);
    assert_eq!(v["metadata"]["cutoff"], 64);

    let o = run(&["pressure", "--t", "0.8,0.9,1", "--q", "-0.5,0"]);
    let (_, _, rows) = read_csv(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert_eq!((rows[5][0].as_str(), rows[5][1].as_str()), ("1.0", "0.0"));
}

#[test]
fn pressure_outside_domain_exits_2() {
    let o = run(&["pressure", "--t", "0.4", "--q", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("0.4") && e.contains("outside"), "{e}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["--cutoff", "4", "constants"][..],
        &["--collocation-order", "3", "constants"],
        &["--tolerance", "1e-3", "constants"],
        &["--tolerance", "0", "constants"],
        &["spectrum", "lyapunov", "--count", "1"],
        &["spectrum", "khintchine", "--gnuplot"],
        &["pressure", "--t", "1"],
        &["bogus"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_gauss-spectra"))
        .args(["verify", "--list"])
        .env("GAUSS_SPECTRA_JOBS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GAUSS_SPECTRA_JOBS"));
}

#[test]
fn jobs_from_flag_and_environment() {
    let o = run(&["--jobs", "2", "pressure", "--t", "1", "--q", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_gauss-spectra"))
        .args(["pressure", "--t", "1", "--q", "0"])
        .env("GAUSS_SPECTRA_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn khintchine_window_violation() {
    let o = run(&["spectrum", "khintchine", "--min", "1e-6", "--max", "1e-5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("window"));
}

#[test]
fn khintchine_curve_peaks_at_xi0() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let o = run(&[
        "spectrum", "khintchine", "--min", "0.3", "--max", "40", "--count", "60", "--spacing", "log", "--output",
        out.to_str().unwrap(), "--gnuplot",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (m, header, rows) = read_csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header, ["exponent", "dimension", "q_value", "residual_1", "residual_2", "slope_fd"]);
    assert_eq!(rows.len(), 60);
    assert_eq!(meta(&m, "failed"), "0");
    let xs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let peak: f64 = meta(&m, "shape.peak_exponent").parse().unwrap();
    let xi0 = 0.987_849_056_833_810_7f64;
    let i = xs.iter().position(|&x| x == peak).unwrap();
    assert!(xs[i - 1] < xi0 && xi0 < xs[i + 1]);
    assert_eq!(meta(&m, "shape.slope_sign_changes"), "1");
    assert_eq!(meta(&m, "shape.q_sign_change_at_peak"), "true");
    let script = std::fs::read_to_string(out.with_extension("gp")).unwrap();
    assert!(script.contains(out.to_str().unwrap()));
}

#[test]
fn lyapunov_curve_json_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let args = |out: &str| {
        vec!["spectrum", "lyapunov", "--min", "1.0", "--max", "30", "--count", "50", "--format", "json", "--output"]
            .into_iter()
            .map(String::from)
            .chain([out.to_string()])
            .collect::<Vec<_>>()
    };
    let (a, b) = (path("a.json"), path("b.json"));
    for out in [&a, &b] {
        let argv = args(out);
        let o = run(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 50);
    let lambda0 = std::f64::consts::PI.powi(2) / (6.0 * std::f64::consts::LN_2);
    let peak = v["shape"]["peak_exponent"].as_f64().unwrap();
    assert!((peak - lambda0).abs() <= 29.0 / 49.0 / 2.0 + 1e-12);
    assert_eq!(v["metadata"]["kind"], "lyapunov");
}

#[test]
fn csv_round_trips_at_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("p.csv");
    let json_path = dir.path().join("p.json");
    let base = ["pressure", "--t", "0.7,0.85,1", "--q", "-1.25,0.1"];
    for (path, fmt) in [(&csv_path, "csv"), (&json_path, "json")] {
        let mut argv: Vec<&str> = base.to_vec();
        argv.extend(["--format", fmt, "--output", path.to_str().unwrap()]);
        assert_eq!(run(&argv).status.code(), Some(0));
    }
    let (_, header, rows) = read_csv(&std::fs::read_to_string(&csv_path).unwrap());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    for (row, obj) in rows.iter().zip(v["rows"].as_array().unwrap()) {
        for (cell, col) in row.iter().zip(&header) {
            let from_csv: f64 = cell.parse().unwrap();
            assert_eq!(from_csv, obj[col].as_f64().unwrap(), "{col}");
            assert_eq!(cell, &format!("{from_csv:?}"));
        }
    }
}

#[test]
fn constants_table() {
    let o = run(&["constants"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, _, rows) = read_csv(&stdout(&o));
    let get = |name: &str| rows.iter().find(|r| r[0] == name).unwrap()[1].clone();
    assert!(get("khintchine_K0").starts_with("2.6854"));
    assert!(get("dim_E2").starts_with("0.53128"));
    assert!(get("lambda0").starts_with("2.37313"));

    let o = run(&["constants", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v["rows"].as_array().unwrap() {
        assert!(row["source"].is_string() && row["method"].is_string());
    }
}

#[test]
fn verify_listing() {
    let o = run(&["verify", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 15);
    assert!(text.contains("cylinder-sum oracle"));
    let o = run(&["verify", "--list", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 15);
}

#[test]
fn verify_coarse_discretization_fails_with_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let o = run(&["verify", "--collocation-order", "4", "--cutoff", "8", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report = std::fs::read_to_string(Path::new(&out)).unwrap();
    let failed: Vec<&str> = report.lines().filter(|l| l.starts_with("[FAIL]")).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|l| l.contains("delta=")));
    assert!(report.contains("pressure normalization"));
}
