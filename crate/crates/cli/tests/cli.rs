use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn qbx(dir: &Path, args: &[&str], config: &Value) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config.to_string()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qbx"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--output-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn circle(extra: Value) -> Value {
    let mut cfg = json!({
        "geometry": {"name": "circle"},
        "discretization": {"kind": "uniform", "panels": 8},
        "operator": {"variant": "D", "density": "sin:2", "variants": ["S", "D", "Sp"]},
        "study": {"ladder": [8, 12, 16, 24], "p_list": [3]},
        "errormap": {"grid": {"nx": 8, "ny": 8}},
    });
    merge(&mut cfg, extra);
    cfg
}

fn merge(a: &mut Value, b: Value) {
    match (a, b) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in b {
                merge(a.entry(k).or_insert(Value::Null), v);
            }
        }
        (a, b) => *a = b,
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_density_evaluates_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["evaluate"], &circle(json!({"operator": {"density": "zero"}})));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/values.csv"));
    assert_eq!(rows.len(), 128);
    for r in rows {
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[4].parse::<f64>().unwrap(), 0.0);
    }
    assert!(dir.path().join("out/effective_config.json").exists());
}

#[test]
fn evaluate_matches_oracle_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["evaluate", "--oracle", "on"], &circle(json!({})));
    assert!(o.status.success(), "{}", stderr(&o));
    for r in csv_rows(&dir.path().join("out/values.csv")) {
        assert!(r[7].parse::<f64>().unwrap() < 1e-8, "{r:?}");
    }
}

#[test]
fn malformed_json_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"geometry\": ").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qbx"))
        .args(["evaluate", "--config"])
        .arg(&path)
        .arg("--output-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn validation_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["errormap"], &circle(json!({"errormap": {"grid": {"nx": 0}}})));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("errormap.grid"), "{}", stderr(&o));

    let o = qbx(dir.path(), &["operator-table"], &circle(json!({"operator": {"variants": ["S", "Sz"]}})));
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("operator.variants[1]") && msg.contains("Sxy") && msg.contains("Dp"), "{msg}");

    let o = qbx(dir.path(), &["convergence"], &circle(json!({"study": {"ladder": [8]}})));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("study.ladder"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn self_referenced_errormap_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["errormap"], &circle(json!({"errormap": {"reference": "self"}})));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/errormap.csv"));
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() <= -299.0));
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/errormap.json")).unwrap()).unwrap();
    assert_eq!(sidecar["grid"]["nx"], 8);
}

#[test]
fn zero_density_operator_table_has_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["operator-table"], &circle(json!({"operator": {"density": "zero"}})));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/operator_table.csv"));
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["S", "D", "Sp"]);
    for r in rows {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn operator_table_without_oracle_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["operator-table", "--oracle", "off"], &circle(json!({})));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gmres_cap_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["convergence"], &circle(json!({"solver": {"max_iter": 2}})));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn circle_dirichlet_orders_fall_in_their_bands() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbx(dir.path(), &["convergence"], &circle(json!({"study": {"p_list": [3, 5, 7]}})));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/convergence.csv"));
    assert_eq!(rows.len(), 12);
    for r in rows {
        let p: f64 = r[2].parse().unwrap();
        let eoc: f64 = r[12].parse().unwrap();
        assert!(eoc >= p - 0.7 && eoc <= p + 1.7, "p = {p}: {eoc}");
        assert_eq!(r[11], "true");
    }
}

#[test]
fn runs_are_deterministic_and_reproducible_from_the_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = circle(json!({}));
    let a = qbx(dir.path(), &["evaluate", "--seed", "11"], &cfg);
    assert!(a.status.success(), "{}", stderr(&a));
    let first = fs::read(dir.path().join("out/values.csv")).unwrap();
    let effective: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/effective_config.json")).unwrap()).unwrap();
    assert_eq!(effective["seed"], 11);
    assert_eq!(effective["qbx"]["p"], 16);

    let b = qbx(dir.path(), &["evaluate", "--threads", "1"], &cfg);
    assert!(b.status.success(), "{}", stderr(&b));
    assert_eq!(fs::read(dir.path().join("out/values.csv")).unwrap(), first);

    let c = qbx(dir.path(), &["evaluate"], &effective);
    assert!(c.status.success(), "{}", stderr(&c));
    assert_eq!(fs::read(dir.path().join("out/values.csv")).unwrap(), first);
}
