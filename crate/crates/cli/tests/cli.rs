use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn antisym(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antisym"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const TINY_CONFIG: &str = r#"{
  "schema_version": 1,
  "n": 2,
  "samples": 16,
  "iterations": 5,
  "learning_rate": 0.0005,
  "seed": 7,
  "hidden_width": 4,
  "hidden_layers": 1,
  "model": { "kind": "slater", "determinants": 2 },
  "target": { "r": 0.9, "c_mode": "closed_form" }
}"#;

#[test]
fn pfaffian_passes_and_reports_disagreement() {
    let dir = tempfile::tempdir().unwrap();
    let o = antisym(&["verify", "pfaffian", "--n", "4", "--r", "0.5", "--trials", "100", "--tol", "1e-8"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("max relative disagreement"));
    let res: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert!(res["max_rel_disagreement"].as_f64().unwrap() < 1e-8);
}

#[test]
fn separation_chain_at_six_reaches_three_tenths() {
    let dir = tempfile::tempdir().unwrap();
    let o = antisym(&["bounds", "separation", "--n", "6", "--l-exp", "36", "--mode", "paper-chain"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let res: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert!(res["value"].as_f64().unwrap() >= 0.3);
    assert!(res["applicable"].as_bool().unwrap());
}

#[test]
fn growth_check_fails_with_exit_one_at_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(antisym(&["verify", "maroti", "--n", "2"], dir.path()).status.code(), Some(1));
    assert_eq!(antisym(&["verify", "maroti", "--n", "6"], dir.path()).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(antisym(&["verify", "pfaffian", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(antisym(&["verify", "pfaffian", "--n", "3"], dir.path()).status.code(), Some(2));
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, TINY_CONFIG.replace("\"schema_version\": 1", "\"schema_version\": 9")).unwrap();
    assert_eq!(antisym(&["train", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn train_writes_listed_artifacts_and_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, TINY_CONFIG).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = antisym(&["train", "--config", cfg.to_str().unwrap()], out);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = fs::read_to_string(a.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("iteration,normalized_mse\n"));
    assert_eq!(csv.lines().count(), 1 + 6);
    assert_eq!(csv, fs::read_to_string(b.join("trajectory.csv")).unwrap());
    let svg = fs::read_to_string(a.join("mse.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);

    let m = manifest(&a);
    assert_eq!(m["command"], "train");
    assert_eq!(m["seeds"][0], 7);
    let listed: Vec<String> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    for name in ["trajectory.csv", "mse.svg", "results.json"] {
        assert!(listed.iter().any(|p| p.ends_with(name)), "{name} missing from manifest");
    }
    for p in &listed {
        assert!(Path::new(p).exists());
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, TINY_CONFIG).unwrap();
    let o = antisym(&["train", "--config", cfg.to_str().unwrap(), "--iterations", "2", "--model", "jastrow"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let m = manifest(dir.path());
    assert_eq!(m["config"]["iterations"], 2);
    assert_eq!(m["config"]["model"]["kind"], "jastrow");
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn report_merges_runs_into_one_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, TINY_CONFIG).unwrap();
    let (a, b, r) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("r"));
    antisym(&["train", "--config", cfg.to_str().unwrap()], &a);
    antisym(&["train", "--config", cfg.to_str().unwrap(), "--model", "jastrow"], &b);
    let o = antisym(
        &["report", "--input", a.join("results.json").to_str().unwrap(), b.join("results.json").to_str().unwrap()],
        &r,
    );
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(r.join("mse.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(">slater_l2<") && svg.contains(">jastrow<"));
    let csv = fs::read_to_string(r.join("trajectories.csv")).unwrap();
    assert!(csv.starts_with("iteration,slater_l2,jastrow\n"));
}

#[test]
fn flatten_diagonal_and_orthogonality_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = antisym(&["verify", "flatten-diagonal", "--n", "4", "--max-exp", "11"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(fs::read_to_string(dir.path().join("entries.csv")).unwrap().starts_with("row,col,re,im\n"));
    assert_eq!(antisym(&["verify", "orthogonality", "--n", "4", "--max-weight", "6"], dir.path()).status.code(), Some(0));
}

#[test]
fn ghat_error_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = antisym(&["ghat", "error", "--n", "2", "--r", "0.5", "--k", "6", "--j", "96", "--lattice", "8", "--samples", "50"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}
