use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qnls(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnls")).args(args).current_dir(dir).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), stderr(out))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn check_reports_mass_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let half = qnls(dir.path(), &["check", "--builtin", "kappa", "--kappa", "0.5"]);
    assert_eq!(code(&half), 0, "{}", stderr(&half));
    assert_eq!(report(&half)["mass_resonance"], Value::Bool(true));
    assert_eq!(report(&half)["sigma"]["exact"], serde_json::json!(["1", "2"]));

    let one = qnls(dir.path(), &["check", "--builtin", "kappa", "--kappa", "1.0"]);
    assert_eq!(code(&one), 0);
    assert_eq!(report(&one)["mass_resonance"], Value::Bool(false));
    assert_eq!(report(&one)["passed"], Value::Bool(true));
}

#[test]
fn malformed_polynomial_exits_with_caret() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"l": 2, "F": "conj(z1)^2 * z2 +* z1", "alpha": [1, 1], "gamma": [1, 0.5]}"#,
    )
    .unwrap();
    let out = qnls(dir.path(), &["check", "--spec", "bad.json"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    let lines: Vec<&str> = err.lines().collect();
    let caret = lines.iter().position(|l| l.trim() == "^").expect("caret line");
    // The caret sits under the second '*'.
    let col = lines[caret].find('^').unwrap();
    assert_eq!(&lines[caret - 1][col..col + 1], "*");
    assert!(out.stdout.is_empty());
}

#[test]
fn unsupported_dimension_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnls(dir.path(), &["groundstate", "--builtin", "kappa", "--n", "7"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dimension 7 out of supported range"), "{}", stderr(&out));
}

#[test]
fn scalar_ground_state_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnls(dir.path(), &["groundstate", "--builtin", "scalar-cubic", "--n", "1", "--out", "gs"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("gs/constants.json")).unwrap();
    let c: Value = serde_json::from_str(&text).unwrap();
    let c1 = c["sharp_constant"].as_f64().unwrap();
    assert!((c1 - 0.73253).abs() <= 1e-4, "C1 = {c1}");
    for f in ["profile.csv", "profile.bin", "identities.json", "stabilizer_history.csv"] {
        assert!(dir.path().join("gs").join(f).is_file(), "{f}");
    }
}

#[test]
fn shg3_identities_certified() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnls(dir.path(), &["groundstate", "--builtin", "shg3", "--n", "3", "--out", "gs"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let id = &report(&out)["identities"];
    for key in ["p_vs_action", "k_vs_action", "q_vs_action"] {
        assert!(id[key].as_f64().unwrap() <= 1e-4, "{key} = {}", id[key]);
    }
    assert_eq!(id["passed"], Value::Bool(true));
}

#[test]
fn stalled_solver_exits_three_with_history() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnls(dir.path(), &["groundstate", "--builtin", "kappa", "--n", "3", "--max-iter", "3", "--out", "gs"]);
    assert_eq!(code(&out), 3);
    let hist = std::fs::read_to_string(dir.path().join("gs/stabilizer_history.csv")).unwrap();
    assert_eq!(hist.lines().count(), 4);
}

#[test]
fn classify_blowup_in_dimension_six() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnls(dir.path(), &["classify", "--builtin", "kappa", "--n", "6", "--lambda", "1.1", "--confirm"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["classification"]["verdict"], "BlowupCriteria");
    assert_eq!(r["confirm"]["result"]["verdict"]["kind"], "blowup-detected");
    assert_eq!(r["confirm"]["result"]["k_monotone_increasing"], Value::Bool(true));
    assert_eq!(r["confirm"]["result"]["pohozaev_monitor"]["negative"], Value::Bool(true));
    assert_eq!(r["confirm"]["agreement"], Value::Bool(true));
    assert!(dir.path().join("qnls-output/classify/diagnostics.csv").is_file());
}

#[test]
fn classify_global_in_dimension_five() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "classify", "--builtin", "kappa", "--n", "5", "--r-max", "100", "--lambda", "0.5", "--confirm", "--t-final",
        "5", "--record-every", "50",
    ];
    let out = qnls(dir.path(), &args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["classification"]["verdict"], "GlobalCriteria");
    assert_eq!(r["confirm"]["result"]["verdict"]["kind"], "completed");
    assert!(r["confirm"]["result"]["k_max_over_k0"].as_f64().unwrap() <= 2.0);
    assert_eq!(r["confirm"]["agreement"], Value::Bool(true));
}

#[test]
fn concentration_profile_ends_at_potential() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnls(dir.path(), &["concentrate", "--builtin", "kappa", "--n", "6", "--out", "conc"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    let p = r["profile"]["potential"].as_f64().unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("conc/concentration.csv")).unwrap();
    let q: Vec<f64> = rdr.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect();
    assert!(q.windows(2).all(|w| w[1] >= w[0]));
    assert!((q.last().unwrap() - p).abs() <= 1e-8 * p.max(1.0));
    assert!((r["half_concentration"]["idempotence_radius"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!(dir.path().join("conc/rescaled.bin").is_file());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gn-constant", "--builtin", "kappa", "--n", "3", "--m", "1024", "--r-max", "30", "--samples", "20", "--seed", "7"];
    let a = qnls(dir.path(), &args);
    let b = qnls(dir.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    let c = qnls(dir.path(), &["check", "--builtin", "shg3", "--seed", "3"]);
    let d = qnls(dir.path(), &["check", "--builtin", "shg3", "--seed", "3"]);
    assert_eq!(c.stdout, d.stdout);
    assert!(String::from_utf8_lossy(&c.stdout).contains("e0"));
}

#[test]
fn sweep_fans_out_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["classify", "--builtin", "kappa", "--n", "6", "--m", "1024", "--sweep", "lambda=0.9,1.1", "--out", "sw"];
    let out = qnls(dir.path(), &args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    let runs = r.as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[1]["report"]["classification"]["verdict"], "BlowupCriteria");
    assert!(dir.path().join("sw/lambda=0.9/classification.json").is_file());
    assert!(dir.path().join("sw/lambda=1.1/classification.json").is_file());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"system": {"builtin": "kappa", "kappa": 1.0},
            "grid": {"n": 4, "m": 512, "r_max": 20},
            "evolve": {"config": {"dt": 0.002, "t_final": 0.1},
                       "initial": {"kind": "gaussian", "amplitude": 0.2}},
            "output_dir": "ev"}"#,
    )
    .unwrap();
    let out = qnls(dir.path(), &["evolve", "--config", "run.json", "--t-final", "0.05"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"]["kind"], "completed");
    assert_eq!(r["result"]["steps"], 25);
    let diag = std::fs::read_to_string(dir.path().join("ev/diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,Q,E,K,P,L,Qfunc,I,T,J,Ecrit"));

    // A block that does not belong to the subcommand is a configuration error.
    let bad = qnls(dir.path(), &["concentrate", "--config", "run.json"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn evolve_snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["evolve", "--builtin", "kappa", "--n", "3", "--m", "256", "--r-max", "16"];
    let mut a = base.to_vec();
    a.extend(["--gaussian", "0.3", "--t-final", "0.02", "--dt", "0.01", "--record-every", "1", "--snapshots", "--out", "a"]);
    let out = qnls(dir.path(), &a);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let snap = dir.path().join("a/snapshots/snap_00002.bin");
    assert!(snap.is_file());
    let mut b = base.to_vec();
    b.extend(["--input", snap.to_str().unwrap(), "--t-final", "0.01", "--dt", "0.01", "--out", "b"]);
    let out = qnls(dir.path(), &b);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}
