use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn susy(dir: &Path, args: &[&str]) -> (Output, Option<Value>) {
    let out_path = dir.join("report.json");
    let _ = std::fs::remove_file(&out_path);
    let output = Command::new(env!("CARGO_BIN_EXE_susy"))
        .args(args)
        .arg("--out")
        .arg(&out_path)
        .output()
        .expect("binary runs");
    let report = std::fs::read_to_string(&out_path).ok().map(|s| serde_json::from_str(&s).expect("report is JSON"));
    (output, report)
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn evaluate_default_chains() {
    let dir = tempfile::tempdir().unwrap();
    let (o, rep) = susy(dir.path(), &["evaluate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = rep.unwrap();
    assert_eq!(rep["schema_version"], 1);
    assert_eq!(rep["calibration"]["kappa_n"], json!([0.0, -2.0]));
    let checks = rep["checks"].as_array().unwrap();
    let unit = &checks[0]["values"]["value"];
    assert!(unit[0].as_f64().unwrap().abs() < 1e-14 && unit[1].as_f64().unwrap().abs() < 1e-14);
    // κ₂ Θ with Θ = Σ e^{−|ξ|²} ≈ 1.07e−8
    let vol = &checks[1]["values"]["value"];
    assert!(vol[0].as_f64().unwrap().abs() < 1e-20);
    assert!((vol[1].as_f64().unwrap() + 2.1402e-8).abs() < 1e-11);
    assert!(checks[1]["values"]["tail_bound"].as_f64().unwrap() <= 1e-14);
}

#[test]
fn evaluate_dsl_chains_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let chains = json!([
        {"n": 2, "words": [[
            {"prime": [{"mode": [1, 0], "re": 1}]},
            {"prime": [{"mode": [-1, 0], "indices": [2], "re": "1/2"}]}
        ]]},
        [[{"prime": [{"mode": [0, 0], "indices": [1, 2], "im": 1}]}]]
    ]);
    std::fs::write(dir.path().join("chains.json"), chains.to_string()).unwrap();
    let cfg = write_config(dir.path(), "cfg.json", &json!({"chains": {"file": "chains.json"}, "geometry": {"g": [[2.0, 0.3], [0.3, 1.0]]}}));
    let (o, rep) = susy(dir.path(), &["evaluate", "--config", &cfg, "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = rep.unwrap();
    for c in rep["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], true, "{c}");
        let abs = c["values"]["oracle"]["abs_diff"].as_f64().unwrap();
        assert!(abs <= c["bounds"]["oracle_abs_diff"].as_f64().unwrap(), "{c}");
    }
    let (o, _) = susy(dir.path(), &["evaluate", "--config", &cfg, "--backend", "float"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn algebra_small_truncation_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.json", &json!({"algebra": {"max_length": 2, "mode_box": 1}}));
    let (o, rep) = susy(dir.path(), &["verify-algebra", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(rep.unwrap()["passed"], true);
    let cfg = write_config(dir.path(), "b.json", &json!({"algebra": {"max_length": 2, "mode_box": 1, "broken_connes": true}}));
    let (o, rep) = susy(dir.path(), &["verify-algebra", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let rep = rep.unwrap();
    let v = &rep["checks"][0]["violations"][0];
    assert!(v["what"].as_str().unwrap().contains("first violation ["), "{v}");
    assert_eq!(v["threshold"], 0);
    assert!(v["value"].as_u64().unwrap() > 0);
}

#[test]
fn algebra_refuses_float_and_warns_when_empty() {
    let dir = tempfile::tempdir().unwrap();
    let (o, rep) = susy(dir.path(), &["verify-algebra", "--backend", "float"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(rep.is_none());
    assert!(String::from_utf8_lossy(&o.stderr).contains("refused"));
    let cfg = write_config(dir.path(), "e.json", &json!({"algebra": {"exhaustive": false}}));
    let (o, rep) = susy(dir.path(), &["verify-algebra", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let rep = rep.unwrap();
    assert!(rep["checks"][0]["warnings"][0].as_str().unwrap().contains("vacuous"));
}

#[test]
fn lemma_is_deterministic_and_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = susy(dir.path(), &["lemma"]);
    assert_eq!(o.status.code(), Some(2));
    let (o, rep) = susy(dir.path(), &["lemma", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let first = serde_json::to_string(&rep.unwrap()).unwrap();
    let a = std::fs::read(dir.path().join("report.json")).unwrap();
    let (_, rep) = susy(dir.path(), &["lemma", "--seed", "5"]);
    let b = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(first, serde_json::to_string(&rep.unwrap()).unwrap());
    let max = serde_json::from_slice::<Value>(&a).unwrap()["checks"][0]["values"]["max_ratio"].as_f64().unwrap();
    assert!(max <= 1.0 + 1e-12);
    let cfg = write_config(dir.path(), "z.json", &json!({"lemma": {"trials": 0}, "seed": 1}));
    let (o, rep) = susy(dir.path(), &["lemma", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rep.unwrap()["checks"][0]["warnings"][0].as_str().unwrap().contains("vacuous"));
}

#[test]
fn budget_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = susy(dir.path(), &["evaluate", "--budget", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("needs"));
    let cfg = write_config(dir.path(), "bad.json", &json!({"tolerances": {"eval_tol": 1e-10, "typo": 1}}));
    let (o, _) = susy(dir.path(), &["evaluate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = susy(dir.path(), &["evaluate", "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invariance_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "i.json", &json!({"seed": 3, "diffeo": {"chains": 3}, "sweep": {"samples": 5}}));
    let (o, rep) = susy(dir.path(), &["invariance", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = rep.unwrap();
    let names: Vec<&str> = rep["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["invariance.cocycles", "invariance.metric_independence", "invariance.diffeomorphism", "invariance.h1", "invariance.h2"] {
        assert!(names.contains(&want), "{names:?}");
    }
    let sweep = rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == "invariance.metric_independence").unwrap();
    assert!(sweep["values"]["control"]["max_rel_deviation"].as_f64().unwrap() > 1e-3);
    assert!(sweep["values"]["max_cocycle_deviation"].as_f64().unwrap() <= 1e-7);
    let h1 = rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == "invariance.h1").unwrap();
    assert!(h1["values"]["sup"].as_f64().unwrap().is_finite());
}

#[test]
fn shipped_example_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/example-config.json");
    let (o, rep) = susy(dir.path(), &["lemma", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(rep.unwrap()["environment"]["seed"], 20261016);
    let (o, rep) = susy(dir.path(), &["evaluate", "--config", cfg, "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(rep.unwrap()["checks"].as_array().unwrap().len(), 2);
}
