use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stanley(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stanley"))
        .args(args)
        .env_remove("STANLEY_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn generate_prefix() {
    let o = stanley(&["generate", "--set", "0,1,5", "--count", "6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "0\n1\n5\n6\n8\n13\n");
    let o = stanley(&["generate", "--set", "5,1,0", "--count", "6", "--format", "json"]);
    assert_eq!(stdout(&o).trim(), r#"{"generators":[0,1,5],"terms":[0,1,5,6,8,13]}"#);
}

#[test]
fn verify_outputs() {
    let o = stanley(&["verify", "--modulus", "9", "--set", "0,3,5,8", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), r#"{"valid":true,"lambda":8,"omega":4}"#);
    let o = stanley(&["verify", "--modulus", "9", "--set", "8,5,3,0"]);
    assert_eq!(stdout(&o), "valid lambda=8 omega=4\n");
    let o = stanley(&["verify", "--modulus", "2", "--set", "0,1", "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], false);
}

#[test]
fn input_errors_exit_three() {
    for args in [
        &["verify", "--modulus", "9", "--set", "0,3,3"][..],
        &["verify", "--modulus", "9", "--set", "0,x"],
        &["generate", "--set", "1,2"],
        &["generate", "--set", "0,1", "--frobnicate"],
        &["nonsense"],
        &["prove", "--lambda", "4"],
        &["enumerate", "--modulus", "200"],
    ] {
        let o = stanley(args);
        assert_eq!(code(&o), 3, "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn enumerate_with_cache_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.jsonl");
    let cache_arg = cache.to_str().unwrap();
    let first = stanley(&["enumerate", "--modulus-max", "9", "--cache", cache_arg, "--format", "json"]);
    assert_eq!(code(&first), 0);
    let stored = std::fs::read_to_string(&cache).unwrap();
    for line in [
        r#"{"modulus":3,"elements":[0,1],"lambda":0,"omega":null}"#,
        r#"{"modulus":3,"elements":[0,2],"lambda":2,"omega":1}"#,
        r#"{"modulus":9,"elements":[0,3,5,8],"lambda":8,"omega":4}"#,
    ] {
        assert!(stored.lines().any(|l| l == line), "{line}");
    }
    let second = stanley(&["enumerate", "--modulus-max", "9", "--cache", cache_arg, "--format", "json"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read_to_string(&cache).unwrap(), stored, "cache hit must not append");
}

#[test]
fn cache_from_environment_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("env.jsonl");
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_stanley"))
            .args(args)
            .env("STANLEY_CACHE", &cache)
            .output()
            .unwrap()
    };
    let clean = run(&["enumerate", "--modulus", "9"]);
    assert!(Path::new(&cache).exists());
    let text = std::fs::read_to_string(&cache).unwrap();
    std::fs::write(&cache, text.replace(r#""lambda":8"#, r#""lambda":7"#)).unwrap();
    let again = run(&["enumerate", "--modulus", "9"]);
    assert_eq!(clean.stdout, again.stdout);
    assert!(String::from_utf8(again.stderr).unwrap().contains("warning"));
}

#[test]
fn text_and_json_agree() {
    let text = stdout(&stanley(&["enumerate", "--modulus", "10"]));
    let json = stdout(&stanley(&["enumerate", "--modulus", "10", "--format", "json"]));
    let from_json: Vec<String> = json
        .lines()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            let els: Vec<String> = v["elements"].as_array().unwrap().iter().map(|e| e.to_string()).collect();
            let omega = if v["omega"].is_null() { "none".to_string() } else { v["omega"].to_string() };
            format!("modulus={} elements={} lambda={} omega={omega}", v["modulus"], els.join(","), v["lambda"])
        })
        .collect();
    assert_eq!(text.lines().collect::<Vec<_>>(), from_json);
}

#[test]
fn prove_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("out.json");
    let trace_arg = trace.to_str().unwrap();
    let o = stanley(&["prove", "--lambda", "5", "--trace", trace_arg]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("impossible"));
    let o = stanley(&["check-trace", "--trace", trace_arg]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = stanley(&["check-trace", "--trace", trace_arg, "--lambda", "7"]);
    assert_eq!(code(&o), 1);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    v["root"]["end"]["out"] = Value::Null;
    std::fs::write(&trace, v.to_string()).unwrap();
    let o = stanley(&["check-trace", "--trace", trace_arg, "--format", "json"]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["valid"], false);

    std::fs::write(&trace, "{").unwrap();
    assert_eq!(code(&stanley(&["check-trace", "--trace", trace_arg])), 3);
}

#[test]
fn prove_candidate_and_budget() {
    let o = stanley(&["prove", "--lambda", "7", "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"], "candidate");
    assert_eq!(v["witness"]["lambda"], 7);
    let o = stanley(&["prove", "--lambda", "15", "--budget-nodes", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn search_and_analyze() {
    let o = stanley(&["search", "--lambda", "7"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "0,1,7\n");
    let o = stanley(&["search", "--lambda", "5", "--bound", "12", "--kmax", "7"]);
    assert_eq!(code(&o), 1);
    let o = stanley(&["analyze", "--set", "0,3,5", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["lambda"], 8);
    assert_eq!(v["modular_set"]["elements"], serde_json::json!([0, 3, 5, 8]));
    let o = stanley(&["analyze", "--set", "0", "--growth", "--count", "17"]);
    assert_eq!(stdout(&o), "n,term,ratio_type1,ratio_type2\n2,3,1,0.5198603854199589\n4,9,1,0.7797905781299385\n8,27,1,0.8772644003961807\n16,81,1,0.8772644003961807\n");
}

#[test]
fn table_tags_provenance() {
    let o = stanley(&["table", "--modulus-max", "10", "--bound", "10", "--kmax", "7", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    let tags: Vec<(i64, String)> =
        rows.iter().map(|r| (r["lambda"].as_i64().unwrap(), r["source"].as_str().unwrap().to_string())).collect();
    assert!(tags.contains(&(7, "enumeration".into())));
    assert!(tags.contains(&(7, "search".into())));
    let mut sorted = tags.clone();
    sorted.sort();
    assert_eq!(tags, sorted);
}
