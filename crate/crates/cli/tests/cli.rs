use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anharmonic_core::asymptotics::ExpansionReport;
use anharmonic_core::eigensolve::Spectrum;
use anharmonic_core::potential::PotentialSpec;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_anharmonic"));
    c.env_remove("ANHARMONIC_THREADS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn harmonic_spectrum_is_odd_integers() {
    let o = run(&["spectrum", "--alpha", "2", "--n", "1..10"]);
    let s: Spectrum<f64> = Spectrum::from_json(&stdout(&o)).unwrap();
    assert_eq!(s.eigenvalues.len(), 10);
    for e in &s.eigenvalues {
        assert!((e.lambda - (2 * e.n - 1) as f64).abs() < 1e-6, "n={} lambda={}", e.n, e.lambda);
    }
}

#[test]
fn quartic_config_ground_state() {
    let cfg = configs().join("quartic.json");
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--n", "1..1"]);
    let v = json(&o);
    let l = v["eigenvalues"][0]["lambda"].as_f64().unwrap();
    assert!((l - 1.060362).abs() < 1e-5, "{l}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"potential\": {\"terms\": [").unwrap();
    let o = run(&["spectrum", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_2() {
    for args in [
        &["spectrum", "--alpha", "2", "--perturbation", "bump:1"][..],
        &["spectrum", "--alpha", "2", "--n", "5..2"],
        &["spectrum", "--alpha", "-1"],
        &["spectrum", "--alpha", "2", "--perturbation", "step:1,-2,2", "--b", "1"],
        &["spectrum"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
    let o = bin().env("ANHARMONIC_THREADS", "zero").args(["spectrum", "--alpha", "2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    // a grid far too coarse for index 40 cannot certify the eigenvalue
    let o = run(&["spectrum", "--alpha", "2", "--n", "40..40", "--grid-h", "0.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let args = ["spectrum", "--alpha", "4", "--perturbation", "step:0.5,-0.5,0.8", "--n", "1..24", "--format", "csv"];
    let one = bin().env("ANHARMONIC_THREADS", "1").args(args).output().unwrap();
    let four = bin().env("ANHARMONIC_THREADS", "4").args(args).output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    assert!(text.starts_with("# schema_version: 1\n"));
    assert_eq!(Spectrum::<f64>::read_csv_rows(text.as_bytes()).unwrap().len(), 24);
}

#[test]
fn compare_harmonic_residuals_are_small() {
    let o = run(&["compare", "--alpha", "2", "--n", "10..100"]);
    let r: ExpansionReport<f64> = ExpansionReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(r.rows.len(), 91);
    assert!(r.rows.iter().all(|row| row.residual.unwrap().abs() <= 0.02));
}

#[test]
fn compare_quartic_residual_slope() {
    let o = run(&["compare", "--alpha", "4", "--n", "10..40"]);
    let r: ExpansionReport<f64> = ExpansionReport::from_json(&stdout(&o)).unwrap();
    let slope = r.residual_fit.unwrap().slope;
    assert!(slope <= -0.9, "residual slope {slope}");
}

#[test]
fn quantization_predictor_is_no_worse_from_n_20() {
    let get = |p: &str| {
        let o = run(&["compare", "--alpha", "4", "--n", "10..40", "--predictor", p]);
        ExpansionReport::<f64>::from_json(&stdout(&o)).unwrap()
    };
    let (e, q) = (get("expansion"), get("quantization"));
    for (a, b) in e.rows.iter().zip(&q.rows).filter(|(a, _)| a.n >= 20) {
        assert_eq!(a.n, b.n);
        assert!(b.residual.unwrap().abs() <= a.residual.unwrap().abs(), "n={}", a.n);
    }
}

#[test]
fn half_line_config_writes_csv_report() {
    let cfg = configs().join("halfline_step.json");
    let o = run(&["compare", "--config", cfg.to_str().unwrap(), "--n", "10..20"]);
    assert!(o.status.success());
    let rows = ExpansionReport::<f64>::read_csv_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.residual.unwrap().abs() < 0.05));
}

#[test]
fn quantize_counting_heat_trace_outputs() {
    let q = json(&run(&["quantize", "--alpha", "2", "--n", "10..12", "--type", "d"]));
    assert_eq!(q["schema_version"], 1);
    let lam = q["rows"][0]["lambda"].as_f64().unwrap();
    assert!((lam - 39.0).abs() < 5e-3, "{lam}");

    let c = json(&run(&["counting", "--alpha", "4", "--lambda", "20..1000", "--points", "50"]));
    assert_eq!(c["rows"].as_array().unwrap().len(), 50);
    assert!(c["max_deviation"].as_f64().unwrap() <= 2.0);

    let h = json(&run(&["heat-trace", "--alpha", "2", "--n", "1..250", "--t", "0.05"]));
    let d = h["rows"][0]["difference"].as_f64().unwrap();
    assert!(d.abs() <= 0.05, "{d}");
}

#[test]
fn volterra_verify_emits_rates_csv() {
    let o = run(&["volterra-verify", "--alpha", "2", "--b", "2", "--lambda", "100..10000", "--points", "5", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version: 1"));
    assert_eq!(lines.next(), Some("which,lambda,error,envelope,exponent,monotone"));
    assert_eq!(lines.count(), 15);
}

#[test]
fn examples_halfline_interlacing_rows_pass() {
    let o = run(&["examples", "halfline"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("[PASS] 6b")), "{text}");
    assert!(text.contains("violations at n >= 5: []"));
}

#[test]
fn examples_quartic_prints_coefficients_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quartic.json");
    let o = run(&["examples", "quartic", "--c", "1", "--output", path.to_str().unwrap()]);
    let text = stdout(&o);
    for k in 0..7 {
        assert!(text.contains(&format!("a{k} = ")), "missing a{k}");
    }
    assert!(text.contains("residual rate"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    let passed = doc["rows"].as_array().unwrap().iter().all(|r| r["passed"] == true);
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }));
}

#[test]
fn examples_weierstrass_reports_k_3_to_6() {
    let o = run(&["examples", "weierstrass", "--tau", "0.5", "--J", "6"]);
    let text = stdout(&o);
    for k in 3..=6 {
        assert!(text.contains(&format!("k={k} ")), "missing k={k}");
    }
    assert!(matches!(o.status.code(), Some(0 | 1)));
}

#[test]
fn potentials_match_the_schema() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../potential.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(root).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut checked = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let cfg: Value = serde_json::from_str(&text).unwrap();
        let pot = &cfg["potential"];
        assert!(validator.is_valid(pot), "{pot}");
        let spec: PotentialSpec<f64> = serde_json::from_value(pot.clone()).unwrap();
        let emitted: Value = serde_json::from_str(&spec.to_json().unwrap()).unwrap();
        assert!(validator.is_valid(&emitted), "{emitted}");
        assert_eq!(PotentialSpec::<f64>::from_json(&emitted.to_string()).unwrap(), spec);
        checked += 1;
    }
    assert!(checked >= 4);
    assert!(!validator.is_valid(&serde_json::json!({"b": -1.0})));
    assert!(!validator.is_valid(&serde_json::json!({"b": 1.0, "composite": {"kind": "cubic"}})));
}
