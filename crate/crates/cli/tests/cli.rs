use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn padwav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padwav")).args(args).output().expect("spawn padwav")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_reports_orthonormal_window() {
    let out = padwav(&["basis", "verify", "--p", "2", "--m", "2", "--jmin", "-2", "--jmax", "2", "--shift-depth", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["orthonormal"], Value::Bool(true));
    // frequencies 1/4 and 3/4, 5 scales, 4 shifts
    assert_eq!(v["count"], 2 * 5 * 4);
    assert!(v["max_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn verify_psi_with_random_gammas() {
    let out = padwav(&[
        "basis", "verify", "--p", "3", "--m", "1", "--family", "psi", "--nu", "1", "--random-gammas", "--seed", "7",
        "--jmin", "-1", "--jmax", "1", "--shift-depth", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_of(&out)["orthonormal"], Value::Bool(true));
}

#[test]
fn parseval_of_unit_ball_matches_closed_form() {
    let out = padwav(&["basis", "parseval", "--p", "3", "--m", "1", "--u0", "omega", "--jmax", "8", "--quiet"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["closed_form"], "6560/6561");
    let want = 1.0 - 3f64.powi(-8);
    assert!((v["partial_sum"].as_f64().unwrap() - want).abs() < 1e-12);
}

#[test]
fn linear_evolution_csv_matches_heat_kernel() {
    // u0 = 1_{Z_2}, Taibleson alpha = 1, m = 1: the mode at scale j has
    // coefficient 2^{-j/2} and decays like exp(-2^{1-j} t)
    let out = padwav(&[
        "evolve", "linear", "--p", "2", "--m", "1", "--jmax", "3", "--tmax", "1", "--steps", "4", "--format", "csv",
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let j: i32 = rec[2].parse().unwrap();
        let re: f64 = rec[4].parse().unwrap();
        let im: f64 = rec[5].parse().unwrap();
        let want = 2f64.powf(-j as f64 / 2.0) * (-(2f64.powi(1 - j)) * t).exp();
        assert!((re - want).abs() < 1e-12 && im.abs() < 1e-12, "t={t} j={j}: {re} vs {want}");
        rows += 1;
    }
    assert_eq!(rows, 5 * 3);
}

#[test]
fn synthesize_then_analyze_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let field = dir.path().join("field.json");
    let back = dir.path().join("back.json");
    let out = padwav(&["basis", "synth", "--p", "3", "--m", "1", "--s", "2/3", "--j", "-1", "--a", "1/3", "--out", path_str(&w)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = padwav(&[
        "analyze", "--input", path_str(&w), "--p", "3", "--jmin", "-2", "--jmax", "1", "--out", path_str(&field), "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&field).unwrap()).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["s"][0], "2/3");
    assert!((entries[0]["coeff"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = padwav(&["synthesize", "--input", path_str(&field), "--out", path_str(&back)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    let (ta, tb) = (a["terms"].as_array().unwrap(), b["terms"].as_array().unwrap());
    assert_eq!(ta.len(), tb.len());
    for (x, y) in ta.iter().zip(tb) {
        assert_eq!(x["center"], y["center"]);
        assert_eq!(x["radius_exp"], y["radius_exp"]);
        let d = (x["coeff"]["re"].as_f64().unwrap() - y["coeff"]["re"].as_f64().unwrap()).abs()
            + (x["coeff"]["im"].as_f64().unwrap() - y["coeff"]["im"].as_f64().unwrap()).abs();
        assert!(d < 1e-12);
    }
}

#[test]
fn fourier_inverse_undoes_fourier() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let hat = dir.path().join("hat.json");
    let back = dir.path().join("back.json");
    assert!(padwav(&["basis", "synth", "--p", "2", "--m", "1", "--j", "1", "--a", "1/2", "--out", path_str(&w)]).status.success());
    assert!(padwav(&["fourier", "--input", path_str(&w), "--out", path_str(&hat)]).status.success());
    assert!(padwav(&["fourier", "--inverse", "--input", path_str(&hat), "--out", path_str(&back)]).status.success());
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    assert_eq!(a["terms"].as_array().unwrap().len(), b["terms"].as_array().unwrap().len());
}

#[test]
fn eigencheck_of_taibleson_is_exact() {
    let out = padwav(&["op", "eigencheck", "--p", "2", "--m", "1", "--j", "-1", "--alpha", "1+1i"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "proven_exact");
    // 2^{alpha (m - j)} with alpha = 1 + i, m - j = 2
    let want = num_complex::Complex64::new(2.0, 0.0).powc(num_complex::Complex64::new(2.0, 2.0));
    assert!((v["eigenvalue"]["re"].as_f64().unwrap() - want.re).abs() < 1e-12);
    assert!((v["eigenvalue"]["im"].as_f64().unwrap() - want.im).abs() < 1e-12);
}

#[test]
fn semilinear_rejects_nested_supports() {
    let out = padwav(&["evolve", "semilinear", "--p", "2", "--m", "1", "--jmax", "3", "--steps", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not disjoint"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(padwav(&["basis", "verify", "--p", "4"]).status.code(), Some(2));
    assert_eq!(padwav(&["basis", "frobnicate"]).status.code(), Some(2));
    assert_eq!(padwav(&["fourier", "--input", "/nonexistent/f.json"]).status.code(), Some(2));
}
