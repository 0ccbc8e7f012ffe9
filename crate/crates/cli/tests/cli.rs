use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use xplab::report::read_growth_csv;

fn xplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xplab"))
        .args(args)
        .env_remove("XPLAB_THREADS")
        .output()
        .expect("run xplab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn growth(dir: &Path, name: &str, extra: &[&str]) -> (String, Value) {
    let csv = dir.join(format!("{name}.csv"));
    let json = dir.join(format!("{name}.json"));
    let mut args = vec!["growth", "--out", csv.to_str().unwrap(), "--json", json.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = xplab(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let json = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    (text, json)
}

fn json_f64(v: &Value) -> Option<f64> {
    v.as_f64()
}

#[test]
fn smallest_instance_has_known_difference() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = growth(dir.path(), "two", &["--sizes", "2", "--eps", "constant"]);
    let rows = read_growth_csv(&csv).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].s1_diff_norm - 5f64.sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = growth(dir.path(), "r", &["--sizes", "2,4,8", "--besov-max", "4"]);
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 4);
    let rows = read_growth_csv(&csv).unwrap();
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (r, j) in rows.iter().zip(jrows) {
        assert_eq!(r.n as u64, j["n"].as_u64().unwrap());
        for (field, value) in [
            ("epsilon", r.epsilon),
            ("s1_diff_norm", r.s1_diff_norm),
            ("perturbation_s1", r.perturbation_s1),
            ("sup_norm", r.sup_norm),
            ("ratio", r.ratio),
            ("closed_form_ratio", r.closed_form_ratio),
            ("wall_time_ms", r.wall_time_ms),
        ] {
            assert_eq!(json_f64(&j[field]), Some(value), "{field} at n = {}", r.n);
        }
        assert_eq!(json_f64(&j["besov_estimate"]), r.besov_estimate);
        assert_eq!(json_f64(&j["besov_tail_bound"]), r.besov_tail_bound);
    }
    assert!(rows[0].besov_estimate.is_some() && rows[2].besov_estimate.is_none());
    for r in &rows {
        assert!((r.ratio - r.closed_form_ratio).abs() <= 1e-6 * r.ratio);
    }
}

#[test]
fn growth_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--sizes", "4,8,…,32", "--eps", "1/loglog", "--besov-max", "0"];
    let (a, _) = growth(dir.path(), "a", &args);
    let (b, _) = growth(dir.path(), "b", &args);
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn one_over_size_shrinks_the_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = growth(dir.path(), "s", &["--sizes", "4,8,16", "--eps", "1/n", "--besov-max", "0"]);
    assert_eq!(json["epsilon_schedule"], "one_over_size");
    for r in read_growth_csv(&csv).unwrap() {
        assert!((r.perturbation_s1 - 2.0 * PI / r.n as f64).abs() < 1e-12);
    }
}

#[test]
fn verify_passes_and_is_deterministic() {
    let run = || {
        let o = xplab(&["verify", "--seed", "42", "--trials", "10", "--json", "-"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        serde_json::from_slice::<Value>(&o.stdout).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    for s in a["suites"].as_array().unwrap() {
        assert_eq!(s["passed"], true, "{s}");
        assert!(s["max_residual"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn verify_prints_one_line_per_suite() {
    let o = xplab(&["verify", "--trials", "2"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 9);
}

#[cfg(debug_assertions)]
#[test]
fn tampered_integral_fails_verification() {
    let o = xplab(&["verify", "--trials", "5", "--tamper-doi"]);
    assert_eq!(code(&o), 1);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().any(|l| l.starts_with("FAIL perturbation identity")), "{out}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    for args in [
        vec!["growth", "--sizes", "8,4", "--out", out],
        vec!["growth", "--sizes", "1", "--out", out],
        vec!["growth", "--sizes", "4", "--eps", "1/sqrt", "--out", out],
        vec!["growth", "--sizes", "4", "--out", "/nonexistent/dir/x.csv"],
        vec!["verify", "--trials", "0"],
        vec!["besov", "--fn", "sinc"],
        vec!["besov", "--fn", "eta", "--points", "1000"],
        vec!["besov", "--fn", "eta", "--extent", "-3pi"],
        vec!["besov", "--fn", "eta", "--bands", "-2:9"],
        vec!["besov", "--fn", "f3:4", "--points", "64"],
        vec!["frobnicate"],
    ] {
        let o = xplab(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_xplab"))
        .args(["verify", "--trials", "1"])
        .env("XPLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_xplab"))
            .args(["verify", "--trials", "5", "--json", "-"])
            .env("XPLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        serde_json::from_slice::<Value>(&o.stdout).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

fn besov(args: &[&str]) -> Value {
    let mut all = vec!["besov", "--json", "-"];
    all.extend_from_slice(args);
    let o = xplab(&all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn piece(report: &Value, band: i64) -> f64 {
    report["pieces"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["band"].as_i64() == Some(band))
        .map(|p| p["sup"].as_f64().unwrap())
        .unwrap()
}

#[test]
fn eta_estimate_is_finite_with_small_upper_tail() {
    let r = besov(&["--fn", "eta", "--extent", "64pi", "--points", "16384"]);
    let v = r["estimate"].as_f64().unwrap();
    assert!(v.is_finite() && v > 0.0);
    assert!(r["band_limit_mass"].as_f64().unwrap() < 1e-6);
    // Band 2 still carries 1.3e-8 of wrap-around leakage at this extent.
    assert!(piece(&r, 2) < 2e-8);
    for band in 3..=7 {
        assert!(piece(&r, band) < 1e-8, "band {band}");
    }
}

#[test]
fn constant_has_zero_seminorm() {
    let r = besov(&["--fn", "constant"]);
    assert_eq!(r["estimate"].as_f64().unwrap(), 0.0);
}

#[test]
fn counterexample_estimates_stay_bounded() {
    let a = besov(&["--fn", "f3:16"])["estimate"].as_f64().unwrap();
    let b = besov(&["--fn", "f3:64"])["estimate"].as_f64().unwrap();
    assert!((a - b).abs() < 0.1 * a.min(b), "{a} vs {b}");
    let phi = besov(&["--fn", "phi_tri:8"]);
    assert_eq!(phi["dimension"], 2);
    assert!(phi["band_limit_mass"].as_f64().unwrap() < 1e-6);
}
