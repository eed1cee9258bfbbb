use std::collections::BTreeMap;

use pyjiuchan::{analyze_text, per_point_text, verify_text};
use serde_json::{json, Value};

fn sample() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/sample.qs")).unwrap()
}

fn assume(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn json_components() {
    let v: Value = serde_json::from_str(&analyze_text(&sample(), None, &assume(&[]), true).unwrap()).unwrap();
    assert_eq!(v["components"], json!([["qs[0]", "qs[1]", "qs[2]"]]));
}

#[test]
fn dot_output() {
    let dot = analyze_text(&sample(), None, &assume(&[]), false).unwrap();
    assert!(dot.starts_with("graph entanglement {\n"));
    assert!(dot.contains("\"qs[0]\" -- \"qs[2]\" [label=\"L5\"];"));
}

#[test]
fn binding_and_atom_assumptions() {
    // `a` is an entry parameter, so it becomes a binding.
    let v: Value = serde_json::from_str(&analyze_text(&sample(), None, &assume(&[("a", 0)]), true).unwrap()).unwrap();
    assert_eq!(v["components"], json!([["qs[0]", "qs[2]"]]));
    // Any other name fixes a condition atom; spaces are ignored.
    let v: Value =
        serde_json::from_str(&analyze_text(&sample(), None, &assume(&[("a == 1", 1)]), true).unwrap()).unwrap();
    assert_eq!(v["components"], json!([["qs[0]", "qs[1]", "qs[2]"]]));
}

#[test]
fn per_point_snapshots() {
    let v: Value = serde_json::from_str(&per_point_text(&sample(), None, &assume(&[])).unwrap()).unwrap();
    let points = v.as_array().unwrap();
    assert_eq!(points.len(), 24);
    assert_eq!(points[0]["point"], "before L0");
    assert_eq!(points[23]["point"], "after L11");
}

#[test]
fn verify_report() {
    let v: Value = serde_json::from_str(&verify_text(&sample(), None, &assume(&[])).unwrap()).unwrap();
    assert_eq!(v["assignments_checked"], 2);
    assert_eq!(v["violations"], json!([]));
}

#[test]
fn errors_are_messages() {
    let err = analyze_text("namespace T { operation", None, &assume(&[]), true).unwrap_err();
    assert!(err.contains("error"), "{err}");
    let err = analyze_text(&sample(), Some("Nope"), &assume(&[]), true).unwrap_err();
    assert!(!err.is_empty());
}
