use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intervalmap"))
        .args(args)
        .env_remove("INTERVALMAP_OUT")
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn spec(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn malformed_spec_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "bad.map", "family = logistic\nlambda 3.2\n");
    let out = run(dir.path(), &["orbit", "--map", &map]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn missing_map_and_bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["orbit"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let map = spec(dir.path(), "l.map", "family = logistic\nlambda = 3.2\n");
    assert_eq!(run(dir.path(), &["attractors", "--map", &map, "--eps", "1e-9"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["entropy", "--map", &map, "--horizon", "4"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["orbit", "--map", &map, "--x0", "1.5"]).status.code(), Some(2));
}

#[test]
fn attractors_on_period_two_logistic() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "l.map", "family = logistic\nlambda = 3.2\n");
    let out = run(dir.path(), &["attractors", "--map", &map, "--out", "res", "--samples", "50", "--horizon", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("res/attractors.json"));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 0);
    let clusters = v["result"]["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), 1);
    assert_eq!(clusters[0]["estimate"]["kind"], "periodic_like");
    assert_eq!(clusters[0]["estimate"]["support"]["points"].as_array().unwrap().len(), 2);
    let svg = fs::read_to_string(dir.path().join("res/attractors.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(v["config_hash"].as_str().unwrap()));
}

#[test]
fn outputs_are_deterministic_and_stamped() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "t.map", "family = tent\nslope = 2\n");
    for out_dir in ["a", "b"] {
        let out = run(dir.path(), &["stats", "--map", &map, "--out", out_dir, "--seed", "7", "--region", "[0,0.5)"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["stats.csv", "stats.json", "stats.svg"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains("config_hash") && text.contains("seed"), "{f} lacks stamp");
    }
    let v = json(&dir.path().join("a/stats.json"));
    assert_eq!(v["seed"], 7);
}

#[test]
fn seed_changes_the_random_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "t.map", "family = tent\nslope = 2\n");
    for (d, seed) in [("a", "1"), ("b", "2")] {
        assert!(run(dir.path(), &["orbit", "--map", &map, "--out", d, "--seed", seed, "--format", "json"]).status.success());
    }
    // orbit writes csv and svg only, so a json filter writes nothing
    assert!(!dir.path().join("a/orbit.csv").exists());
    for (d, seed) in [("c", "1"), ("e", "2")] {
        assert!(run(dir.path(), &["orbit", "--map", &map, "--out", d, "--seed", seed, "--format", "csv"]).status.success());
    }
    let head = |d: &str| fs::read_to_string(dir.path().join(d).join("orbit.csv")).unwrap().lines().nth(1).unwrap().to_string();
    assert_ne!(head("c"), head("e"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "l.map", "family = logistic\nlambda = 4\n");
    let out = Command::new(env!("CARGO_BIN_EXE_intervalmap"))
        .args(["entropy", "--map", &map])
        .env("INTERVALMAP_OUT", dir.path().join("envout"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("envout/entropy.csv")).unwrap();
    assert!(csv.starts_with("# schema: 1"));
    assert!(csv.lines().any(|l| l.starts_with("24,16777216,")));
}

#[test]
fn historic_needs_a_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "l.map", "family = logistic\nlambda = 3.2\n");
    let out = run(dir.path(), &["historic", "--map", &map, "--horizon", "20000", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn historic_witness_on_full_logistic() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "l.map", "family = logistic\nlambda = 4\n");
    let out = run(dir.path(), &["historic", "--map", &map, "--horizon", "20000", "--samples", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("historic.json"));
    assert!(v["result"]["witness"]["gap"].as_f64().unwrap() >= 0.4);
    assert!(dir.path().join("envelope.svg").exists());
}

#[test]
fn verify_passes_on_full_logistic() {
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "l.map", "family = logistic\nlambda = 4\n");
    let out = run(dir.path(), &["verify", "--map", &map, "--samples", "20", "--horizon", "1000000"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS historic_witness"));
    assert!(stdout.contains("PASS omega_agreement"));
    let v = json(&dir.path().join("verify.json"));
    assert!(v["result"]["entropy"].as_f64().unwrap() > 0.1);
}

#[test]
fn verify_fails_loudly_on_violated_checks() {
    // a tiny horizon makes the frequency threshold too coarse for agreement
    let dir = tempfile::tempdir().unwrap();
    let map = spec(dir.path(), "l.map", "family = logistic\nlambda = 4\n");
    let out = run(dir.path(), &["verify", "--map", &map, "--samples", "5", "--horizon", "300"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
