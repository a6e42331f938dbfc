//! Browser bindings for the qwalk demo page. Each export takes plain strings
//! and returns a JSON document; the logic lives in the `*_json` functions so it
//! can be tested natively.

use qwalk::cli::{graph_check, parse_input, resolve_protocol, InputMode};
use qwalk::graphshift::ShiftVariant;
use qwalk::protocol::run_input;
use qwalk::verify::{audit_paper_with, DEFAULT_SAMPLES};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn protocol_name(scenario: &str) -> Result<String, String> {
    match scenario {
        "sanity" => Ok("sanity".into()),
        v => v
            .parse::<ShiftVariant>()
            .map(|v| format!("paper:{v}"))
            .map_err(|_| format!("unknown scenario {v:?}")),
    }
}

/// Runs one input through `scenario` (`original`, `rearranged`, `completed`
/// or `sanity`). `amps` is a comma-separated amplitude list such as
/// `0.6,0.8i,0`.
pub fn run_protocol_json(scenario: &str, amps: &str) -> Result<String, String> {
    let spec = resolve_protocol(&protocol_name(scenario)?, None).map_err(|e| e.to_string())?;
    let a = match parse_input(amps, None, None).map_err(|e| e.to_string())? {
        InputMode::Explicit(a) => a,
        InputMode::Random { .. } => return Err("explicit amplitudes required".into()),
    };
    let final_state = spec.evolve(&a).map_err(|e| e.to_string())?;
    let per_position = final_state.len() / spec.positions();
    let distribution: Vec<f64> = final_state
        .amps()
        .as_slice()
        .chunks(per_position)
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let run = run_input(&spec, &a).map_err(|e| e.to_string())?;
    Ok(json!({
        "protocol": spec.name,
        "position_distribution": distribution,
        "norm_after_walk": run.norm_after_walk,
        "outcomes": run.outcomes,
    })
    .to_string())
}

/// Shift audit for a builtin graph name such as `paper:original` or `cycle:6`.
pub fn graph_check_json(name: &str) -> Result<String, String> {
    let report = graph_check(name).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

pub fn verify_paper_json(variant: &str, seed: u64) -> Result<String, String> {
    let variant: ShiftVariant = variant.parse().map_err(|_| format!("unknown variant {variant:?}"))?;
    audit_paper_with(variant, seed, DEFAULT_SAMPLES)
        .map(|r| r.to_json())
        .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn run_protocol(scenario: &str, amps: &str) -> Result<String, JsValue> {
    run_protocol_json(scenario, amps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn check_graph(name: &str) -> Result<String, JsValue> {
    graph_check_json(name).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn verify_paper(variant: &str, seed: u32) -> Result<String, JsValue> {
    verify_paper_json(variant, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}
