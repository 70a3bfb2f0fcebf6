use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn mick(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mick")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = mick(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/dji_spx.csv")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn solve_zero_ratio_writes_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let out = mick(&["solve", "--family", "mick", "--n", "5", "--ratio", "0", "-o", s(&path)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l == "0.04,0.04,0.04,0.04,0.04"));
}

#[test]
fn solve_mics_reference_ratio() {
    let v = json(&["solve", "--family", "mics", "--n", "30", "--ratio", "0.01"]);
    assert!((f(&v["report"]["rho"]) - 0.552).abs() < 0.005);
    assert_eq!(v["report"]["converged"], true);
}

#[test]
fn solve_with_tau_target_calibrates() {
    let v = json(&["solve", "--family", "mick", "--n", "30", "--tau", "0.5"]);
    assert!((f(&v["calibration"]["ratio"]) - 2.9).abs() < 0.05);
    assert!((f(&v["report"]["tau"]) - 0.5).abs() <= 1e-4);
}

#[test]
fn table_rows() {
    let v = json(&["table", "--family", "mick", "--n", "30", "--ratios", "0,5"]);
    let rows = v.as_array().unwrap();
    assert!(f(&rows[0]["rho"]).abs() < 1e-12);
    assert!((f(&rows[0]["information"]) + 2.0 * 30f64.ln()).abs() < 1e-12);
    assert!((f(&rows[1]["rho"]) - 0.858).abs() < 0.005);
    assert!((f(&rows[1]["tau"]) - 0.662).abs() < 0.005);
    assert!((f(&rows[1]["information"]) + 6.174).abs() < 0.01);

    let out = mick(&["table", "--family", "mics", "--n", "30", "--ratios", "0.02"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ratio,rho,tau,information"));
    let cols: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[1] - 0.742).abs() < 0.005 && (cols[2] - 0.534).abs() < 0.005 && (cols[3] + 6.426).abs() < 0.01);
}

#[test]
fn check_reports() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("k.csv");
    assert!(mick(&["solve", "--n", "12", "--ratio", "1.5", "-o", s(&solved)]).status.success());
    let v = json(&["check", s(&solved)]);
    assert_eq!(v["classification"], "mick");
    assert_eq!(v["tp2"]["holds"], true);
    assert!(f(&v["stationarity"]["residual_norm"]) < 1e-6);
    assert!((f(&v["stationarity"]["lambda"]) - 1.5).abs() < 1e-8);
    assert_eq!(v["definiteness"]["positive_definite"], true);
    assert_eq!(v["unique"], true);

    let anti = dir.path().join("a.csv");
    let third = "0.3333333333333333";
    std::fs::write(&anti, format!("0,0,{third}\n0,{third},0\n{third},0,0\n")).unwrap();
    let v = json(&["check", s(&anti)]);
    assert_eq!(v["tp2"]["holds"], false);

    let uniform = dir.path().join("u.csv");
    assert!(mick(&["solve", "--n", "4", "--ratio", "0", "-o", s(&uniform)]).status.success());
    let v = json(&["check", s(&uniform)]);
    assert_eq!(v["classification"], "both");
    assert!(v["notes"].as_array().unwrap().is_empty());

    let mics = dir.path().join("s.csv");
    assert!(mick(&["solve", "--family", "mics", "--n", "30", "--ratio", "0.01", "-o", s(&mics)]).status.success());
    let v = json(&["check", s(&mics)]);
    assert_eq!(v["classification"], "mics");
    assert!((f(&v["theta"]) - 0.75).abs() < 1e-9);
}

#[test]
fn sample_is_deterministic_and_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    assert!(mick(&["solve", "--n", "8", "--ratio", "4", "-o", s(&m)]).status.success());
    let a = mick(&["sample", s(&m), "--count", "20000", "--seed", "3"]).stdout;
    let b = mick(&["sample", s(&m), "--count", "20000", "--seed", "3"]).stdout;
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut u: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(u.len(), 20000);
    u.sort_by(f64::total_cmp);
    let ks = u
        .iter()
        .enumerate()
        .map(|(k, &x)| (x - k as f64 / 20000.0).abs())
        .fold(0.0, f64::max);
    assert!(ks < 0.015);
}

#[test]
fn fit_observed_summary() {
    let v = json(&[
        "fit",
        s(&fixture()),
        "--x",
        "DJI",
        "--y",
        "SPX",
        "--ranks",
        "scaled",
        "--replicates",
        "4",
    ]);
    assert_eq!(v["returns"], 1635);
    let obs = &v["observed"];
    let want = [
        ("tau", 0.802),
        ("rho", 0.939),
        ("lower_tail_5", 0.827),
        ("upper_tail_5", 0.753),
        ("lower_tail_1", 0.812),
        ("upper_tail_1", 0.937),
    ];
    for (k, w) in want {
        assert!(f(&obs[k]) >= w && f(&obs[k]) < w + 0.001, "{k}");
    }
    assert!((f(&v["mick"]["simulated"]["tau"]) - 0.802).abs() < 0.05);
    assert!((f(&v["mics"]["simulated"]["rho"]) - 0.939).abs() < 0.05);
}

#[test]
fn fit_joins_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let mut ta = String::from("date,p\n");
    let mut tb = String::from("date,q\n");
    let mut joined = 0;
    for (k, (m, d)) in (1..=12).flat_map(|m| (1..=28).map(move |d| (m, d))).enumerate() {
        let x = 100.0 + ((k * 7919) % 211) as f64;
        ta.push_str(&format!("2021-{m:02}-{d:02},{x}\n"));
        if d % 5 != 0 {
            tb.push_str(&format!("2021-{m:02}-{d:02},{}\n", 200.0 + ((k * 104_729) % 193) as f64 + 0.3 * x));
            joined += 1;
        }
    }
    std::fs::write(&a, ta).unwrap();
    std::fs::write(&b, tb).unwrap();
    let v = json(&["fit", s(&a), "--x", "p", "--y", "q", "--y-file", s(&b), "--n", "10", "--replicates", "2"]);
    assert_eq!(v["returns"], joined - 1);
}

#[test]
fn exit_codes() {
    assert_eq!(mick(&["solve", "--n", "5", "--tau", "0.99"]).status.code(), Some(2));
    assert_eq!(mick(&["solve", "--n", "5", "--ratio", "1", "--tau", "0.2"]).status.code(), Some(2));
    assert_eq!(
        mick(&["solve", "--n", "30", "--ratio", "3", "--no-newton", "--max-sweeps", "5"]).status.code(),
        Some(3)
    );
    assert_eq!(mick(&["check", "/definitely/not/here.csv"]).status.code(), Some(4));
    let help = String::from_utf8(mick(&["--help"]).stdout).unwrap();
    assert!(help.contains("Exit codes") && help.contains("3  an iterative method did not converge"));
}
