mod common;

use std::f64::consts::SQRT_2;
use std::process::{Command, Output};

use acmorse_lab::records::{OracleRecord, Summary, VerifyRecord};

fn acmorse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acmorse")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn heteroclinic_csv_matches_tanh() {
    let o = acmorse(&["heteroclinic", "--potential", "standard"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,H,dH"));
    let mut checked = 0;
    for line in lines {
        let row: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (t, h) = (row[0], row[1]);
        if t.abs() <= 10.0 {
            assert!((h - (t / SQRT_2).tanh()).abs() <= 1e-8, "t = {t}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn coloring_oracle_is_deterministic() {
    let args = ["coloring-oracle", "--k", "3", "--trials", "10000", "--seed", "7"];
    let a = acmorse(&args);
    let b = acmorse(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let r: OracleRecord = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!((r.k, r.trials, r.violations, r.min_adjacency), (3, 10_000, 0, 4));
    assert_eq!(r.interpretations.runs.shortfalls, 0);
}

#[test]
fn oracle_rejects_out_of_range_k() {
    let o = acmorse(&["coloring-oracle", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(acmorse(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(acmorse(&["solve"]).status.code(), Some(2));
    let o = acmorse(&["solve", "--config", "/nonexistent/experiment.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn radii_beyond_the_grid_are_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = common::small_experiment(dir.path(), "saddle.cfg", "");
    let text = std::fs::read_to_string(&path).unwrap().replace("[3.0, 6.0, 8.0]", "[3.0, 6.0, 10.0]");
    std::fs::write(&path, text).unwrap();
    let o = acmorse(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exceeds L - 2"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn stage_failure_names_the_stage_and_keeps_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = common::small_experiment(dir.path(), "saddle.cfg", "[solver]\nmax_iter = 1\nfallback_steps = 1\n");
    let o = acmorse(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stage `solve` failed"), "{}", stderr(&o));
    assert!(dir.path().join("out/iterations.csv").exists());
    assert!(!dir.path().join("out/summary.json").exists());
}

#[test]
fn stage_subcommands_share_a_stored_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = common::small_experiment(dir.path(), "saddle.cfg", "");
    let cfg = path.to_str().unwrap();
    let o = acmorse(&["solve", "--config", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let field = dir.path().join("out/field.bin");
    let o = acmorse(&["spectrum", "--config", cfg, "--field", field.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("out/spectra.json").exists());
    let o = acmorse(&["nodal", "--config", cfg, "--field", field.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = acmorse(&["ansatz", "--config", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("out/ansatz.bin").exists());
}

#[test]
fn bundled_planar_config_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::configs_dir().join("planar.toml");
    let o = acmorse(&["run", "--config", cfg.to_str().unwrap(), "--output", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: Summary = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s.estimated_index, Some(0));
    assert!(s.bound_satisfied);
}

#[test]
fn verify_bundled_saddle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::configs_dir().join("saddle.toml");
    let o = acmorse(&["verify", "--config", cfg.to_str().unwrap(), "--output", dir.path().to_str().unwrap(), "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: VerifyRecord = serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert!(v.pass);
    assert_eq!(v.summary.k, 2);
    assert!(v.summary.estimated_index.is_some_and(|i| i >= 1));
    assert!(v.summary.q >= 2 && v.summary.ends >= 2);
}
