use qwalk_web::{graph_check_json, run_protocol_json, verify_paper_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn rearranged_distribution_sums_to_norm() {
    let s = 1.0 / 3f64.sqrt();
    let v = parse(&run_protocol_json("rearranged", &format!("{s},{s},{s}")).unwrap());
    let dist: Vec<f64> = v["position_distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(dist.len(), 10);
    let total: f64 = dist.iter().sum();
    assert!((total - 2.0 / 3.0).abs() < 1e-12, "{total}");
    let norm = v["norm_after_walk"].as_f64().unwrap();
    assert!((norm * norm - total).abs() < 1e-12);
}

#[test]
fn sanity_scenario_is_perfect() {
    let v = parse(&run_protocol_json("sanity", "0.6,0,0.8i").unwrap());
    for o in v["outcomes"].as_array().unwrap() {
        if o["possible"] == true {
            assert!((o["fidelity_vs_input"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn bad_inputs_are_errors() {
    assert!(run_protocol_json("diagonal", "1,0,0").is_err());
    assert!(run_protocol_json("sanity", "1,1,0").is_err());
    assert!(run_protocol_json("sanity", "random").is_err());
    assert!(graph_check_json("grid:3").is_err());
    assert!(verify_paper_json("other", 7).is_err());
}

#[test]
fn graph_and_audit_reports() {
    let g = parse(&graph_check_json("paper:original").unwrap());
    assert_eq!(g["audit"]["is_permutation"], false);
    let r = parse(&verify_paper_json("completed", 7).unwrap());
    assert_eq!(r["claims"].as_array().unwrap().len(), 6);
}
