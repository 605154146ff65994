use std::path::Path;
use std::process::{Command, Output};

fn mplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mplab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn paper_suite_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let o = mplab(&["paper", "--out", out.to_str().unwrap(), "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    let a = std::fs::read(out_a.join("report.json")).unwrap();
    let b = std::fs::read(out_b.join("report.json")).unwrap();
    assert_eq!(a, b);
    let v = read_json(&out_a.join("report.json"));
    let records = v["records"].as_array().unwrap();
    assert!(records.len() >= 12);
    for r in records {
        assert_eq!(r["record"], "fixture");
        assert!(!r["citation"].as_str().unwrap().is_empty());
        assert_ne!(r["verdict"], "fail", "{r}");
    }
    assert!(out_a.join("report-timings.json").exists());
}

#[test]
fn validate_plus_laplacian_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "operator = \"+Δ\"\n[validate]\nsamples = 300\ntrials = 50\n");
    let o = mplab(&["validate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("violation at"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let unknown = write_config(dir.path(), "u.toml", "operator = \"-u''\"\nbogus = 1\n");
    assert_eq!(mplab(&["eigen", "--config", &unknown, "--out", out]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(mplab(&["eigen", "--config", missing.to_str().unwrap(), "--out", out]).status.code(), Some(2));
    let no_such = write_config(dir.path(), "n.toml", "operator = \"not-an-operator\"\n");
    assert_eq!(mplab(&["mu1", "--config", &no_such, "--out", out]).status.code(), Some(2));
    assert_eq!(mplab(&["plot", "--out", out]).status.code(), Some(2));
}

#[test]
fn knife_edge_mu1_from_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"operator": "−xu′", "domain": {"shape": "interval", "a": 0.0, "b": 1.0}}"#,
    );
    let o = mplab(&["mu1", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("report.json"));
    let value = v["records"][0]["estimate"]["value"].as_f64().unwrap();
    assert!((-0.05..=0.05).contains(&value), "{value}");
}

#[test]
fn eigen_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "operator = \"-u''\"\nh = 0.01\n[output]\nstem = \"lap\"\n");
    let o = mplab(&["eigen", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("lap-eigen.csv")).unwrap();
    assert!(text.starts_with("method,domain,h,eps,lambda_lo,lambda_hi,iterations\nblowup,"));
}
