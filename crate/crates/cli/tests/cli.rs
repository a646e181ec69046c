use std::f64::consts::SQRT_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bellshare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellshare"))
        .args(args)
        .env_remove("BELLSHARE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const TRIVIAL: &str = r#"{"bias": 0.0, "strength": 0.0, "direction": [0, 0, 1]}"#;

fn scenario_json(state_t: &str, eps_b: f64, b_secondary: &str) -> String {
    format!(
        r#"{{"state": {{"a": [0,0,0], "b": [0,0,0], "T": {state_t}}},
            "policy_a": {{"primary": {TRIVIAL}, "secondary": {TRIVIAL}, "epsilon": 0.5}},
            "policy_b": {{"primary": {TRIVIAL}, "secondary": {b_secondary}, "epsilon": {eps_b}}}}}"#
    )
}

const SINGLET_T: &str = "[[-1,0,0],[0,-1,0],[0,0,-1]]";

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn thresholds_text_and_json_agree_with_library() {
    let text = bellshare(&["thresholds"]);
    assert!(text.status.success());
    assert_eq!(stdout(&text).lines().count(), 9);
    let json = bellshare(&["thresholds", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&json)).unwrap();
    let t = bellshare::bounds::thresholds();
    for (name, value) in t.entries() {
        assert_eq!(v[name].as_f64().unwrap(), value, "{name}");
        let line = stdout(&text).lines().find(|l| l.split_whitespace().next() == Some(name)).unwrap().to_string();
        let printed: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(printed, value, "{name} round-trips through text");
    }
}

#[test]
fn eval_trivial_singlet() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "s.json", &scenario_json(SINGLET_T, 0.5, TRIVIAL));
    let o = bellshare(&["eval", &f]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let s22 = v["report"]["s22"].as_f64().unwrap();
    assert!((s22 - 2.0 * SQRT_2).abs() < 1e-12);
    assert!((s22 - v["s22_via_state"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(v["region"]["s11_s22_allowed"], Value::Bool(true));
    assert!(v["warnings"].as_array().unwrap().is_empty());
    assert!(stderr(&o).is_empty());
}

#[test]
fn eval_reports_field_path_for_zero_direction() {
    let dir = tempfile::tempdir().unwrap();
    let bad = r#"{"bias": 0.0, "strength": 0.5, "direction": [0, 0, 0]}"#;
    let f = write(dir.path(), "bad.json", &scenario_json(SINGLET_T, 0.5, bad));
    let o = bellshare(&["eval", &f]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("policy_b.secondary") && e.contains("direction"), "{e}");
}

#[test]
fn eval_rejects_unphysical_state_with_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "u.json", &scenario_json("[[1,0,0],[0,-1,0],[0,0,-1]]", 0.5, TRIVIAL));
    let o = bellshare(&["eval", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("minimum eigenvalue -5.0"), "{}", stderr(&o));
}

#[test]
fn eval_warns_on_unequal_selection() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "w.json", &scenario_json(SINGLET_T, 0.2, TRIVIAL));
    let o = bellshare(&["eval", &f]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("policy_b.epsilon"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
}

fn small_config(dir: &Path) -> String {
    write(dir, "cfg.json", r#"{"population_size": 20, "max_generations": 30, "seed": 4}"#)
}

#[test]
fn sweep_outputs_are_replay_identical_and_manifested() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = bellshare(&[
            "sweep", "--problem", "crossed", "--s-grid", "2.2,2.5", "--config", &cfg,
            "--workers", workers, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (fs::read(&out).unwrap(), fs::read(out.with_extension("json")).unwrap())
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert_eq!(a, b);
    let csv = String::from_utf8(a.0).unwrap();
    assert!(csv.starts_with("s,best_objective,feasible,generations,alpha,X_u,"));
    assert_eq!(csv.lines().count(), 3);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "sweep");
    assert_eq!(m["seed"], 4);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    let m2: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config_hash"], m2["config_hash"]);
}

#[test]
fn sweep_reports_infeasible_levels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = bellshare(&["sweep", "--s-grid", "1.0,3.0", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let last = csv.lines().last().unwrap();
    assert!(last.contains(",false,"), "{last}");
    assert!(stderr(&o).contains("infeasible"));
}

#[test]
fn sweep_exit_status_flags_values_above_two() {
    // at s = 2 trivial observables with bias ±1 leave S*(A2,B2) = 2√2
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = bellshare(&["sweep", "--s-grid", "2.0", "--config", &cfg, "--json"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("violation: s = 2"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["points"][0]["best_objective"].as_f64().unwrap() > 2.8);
}

#[test]
fn verify_bounds_modes() {
    let o = bellshare(&["verify-bounds", "--mode", "eq13_hypotheses", "--n", "20000", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("status                    pass"));
    let o = bellshare(&["verify-bounds", "--mode", "unbiased_singlet", "--n", "20000", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_first_plus_second"]["value"].as_f64().unwrap() <= 4.0 + 1e-9);
    let o = bellshare(&["verify-bounds", "--mode", "free", "--n", "5000"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("report only"));
    let o = bellshare(&["verify-bounds", "--mode", "bogus"]);
    assert!(!o.status.success());
}

#[test]
fn biased_window_endpoints() {
    let o = bellshare(&["biased-window", "--json", "--steps", "10"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lo = v["window"][0].as_f64().unwrap();
    let hi = v["window"][1].as_f64().unwrap();
    assert!((lo - (8f64.powf(0.25) - 1.0)).abs() < 1e-8);
    assert!((hi - (2.0 - SQRT_2).sqrt()).abs() < 1e-8);
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    let o = bellshare(&["biased-window", "--epsilon", "0.1", "--grid", "0.7"]);
    assert!(stdout(&o).contains("window  = empty"));
}

#[test]
fn oracle_check_passes() {
    let o = bellshare(&["oracle-check", "--n", "500", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-10);
}
