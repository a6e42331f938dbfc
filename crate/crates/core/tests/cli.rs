use std::path::PathBuf;
use std::process::{Command, Output};

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .output()
        .expect("spawn qwalk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const SANITY_FILE: &str = r#"{
  "graph": {"n_vertices": 3, "n_labels": 3,
            "edges": [[0,0,0],[1,1,0],[2,2,0],[0,1,1],[1,2,1],[2,0,1],[0,2,2],[1,0,2],[2,1,2]]},
  "start_vertex": 0,
  "coin_dims": [3, 3],
  "steps": [
    {"coin_subsystem": 1, "coin_kind": "identity", "dim": 3},
    {"coin_subsystem": 2, "coin_kind": "fourier", "dim": 3}
  ],
  "position_basis": "computational",
  "coin1_basis": "fourier",
  "recovery": "synthesize"
}"#;

#[test]
fn verify_paper_json_contains_c1_match() {
    let o = qwalk(&["verify-paper", "--variant", "rearranged", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["claims"][0]["claim_id"], "C1");
    assert_eq!(v["claims"][0]["status"], "match");
    assert_eq!(v["metadata"]["variant"], "rearranged");
}

#[test]
fn verify_paper_original_lists_collision() {
    let o = qwalk(&["verify-paper", "--variant", "original", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let c4 = text.lines().skip_while(|l| !l.starts_with("C4")).nth(1).unwrap();
    assert!(c4.contains("colliding_out [(3, 1), (6, 1)]"), "{c4}");
}

#[test]
fn invalid_variant_is_usage_error() {
    let o = qwalk(&["verify-paper", "--variant", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sideways"));
}

#[test]
fn run_basis_input_ledger() {
    let o = qwalk(&["run", "--protocol", "paper", "--input", "1,0,0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let outcomes = v["runs"][0]["outcomes"].as_array().unwrap();
    assert_eq!(outcomes.len(), 30);
    let f0 = outcomes
        .iter()
        .find(|o| o["position_outcome"] == 1 && o["coin1_outcome_index"] == 0)
        .unwrap();
    // a = e0 leaves a0(|101⟩ + |102⟩)/√3 at position 1; projecting coin₁ on f0 gives 2/9.
    let p = f0["probability"].as_f64().unwrap();
    assert!((p - 2.0 / 9.0).abs() < 1e-12, "{p}");
    assert!(f0["fidelity_vs_input"].as_f64().is_some());
}

#[test]
fn random_sweep_has_aggregate_and_is_reproducible() {
    let args = ["run", "--input", "random", "--count", "100", "--seed", "7", "--format", "json"];
    let a = qwalk(&args);
    let b = qwalk(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 100);
    let agg = v["aggregate"].as_array().unwrap();
    assert!(agg.iter().any(|o| o["min_fidelity"].is_number()));
}

#[test]
fn non_normalized_input_is_rejected() {
    let o = qwalk(&["run", "--input", "1,1,1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("norm is 1.732"), "{err}");
}

#[test]
fn protocol_file_runs_with_synthesized_recovery() {
    let path = scratch("sanity.json", SANITY_FILE);
    let o = qwalk(&["run", "--protocol", path.to_str().unwrap(), "--input", "0,0.6,0.8i"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!stdout(&o).contains("no recovery"));
    assert_eq!(stdout(&o).matches("fidelity   1.000000").count(), 9);
}

#[test]
fn malformed_config_reports_position() {
    let broken = SANITY_FILE.replace("\"start_vertex\": 0,", "\"start_vertex\": ,");
    let path = scratch("broken.json", &broken);
    let o = qwalk(&["run", "--protocol", path.to_str().unwrap(), "--input", "1,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 4 column"), "{err}");
}

#[test]
fn small_recovery_matrix_is_rejected() {
    let bad = SANITY_FILE.replace(
        "\"recovery\": \"synthesize\"",
        "\"recovery\": [{\"position\": 0, \"coin1_outcome\": 0, \"matrix\": [[[1,0],[0,0]],[[0,0],[1,0]]]}]",
    );
    let path = scratch("small-recovery.json", &bad);
    let o = qwalk(&["run", "--protocol", path.to_str().unwrap(), "--input", "1,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("must be 3x3"), "{}", stderr(&o));
}

#[test]
fn graph_check_codes() {
    assert_eq!(qwalk(&["graph-check", "cycle:10"]).status.code(), Some(0));
    let o = qwalk(&["graph-check", "paper:original"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("missing (vertex,label): (0,1) (0,2) (2,2)"));
    assert_eq!(qwalk(&["graph-check", "path:4"]).status.code(), Some(2));
}

#[test]
fn graph_check_rejects_bad_files() {
    let out_of_range = scratch(
        "vertex10.json",
        r#"{"n_vertices": 10, "n_labels": 1, "edges": [[9, 10, 0]]}"#,
    );
    let o = qwalk(&["graph-check", out_of_range.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("out of range"), "{}", stderr(&o));

    let malformed = scratch("malformed-graph.json", "{\"n_vertices\": 3,");
    let o = qwalk(&["graph-check", malformed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("report.json");
    let _ = std::fs::remove_file(&path);
    let o = qwalk(&["verify-paper", "--format", "json", "--samples", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["metadata"]["samples"], 5);

    let o = qwalk(&["graph-check", "cycle:3", "--out", "/nonexistent-dir/x.txt"]);
    assert_eq!(o.status.code(), Some(1));
}
