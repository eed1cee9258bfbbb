//! Text renderings of analysis results. All output is byte-stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;
use serde_json::json;

use crate::analysis::{AnalysisResult, AnalysisState, Edge, EntanglementGraph, QubitState, StackEntry};
use crate::normalize::QubitRef;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Dot,
    Json,
}

/// Sort key for a path label: `L6.2` orders as (6, 2), before `L10`.
pub fn label_key(label: &str) -> (Vec<u64>, String) {
    let nums = label.trim_start_matches('L').split(['.', '#']).map_while(|p| p.parse().ok()).collect();
    (nums, label.to_string())
}

fn sorted_edges(graph: &EntanglementGraph) -> Vec<(String, String, &str)> {
    let mut out: Vec<_> = graph
        .edges()
        .iter()
        .map(|e| {
            let (x, y) = (e.a.to_string(), e.b.to_string());
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            (lo, hi, e.label.as_str())
        })
        .collect();
    out.sort_by(|p, q| (&p.0, &p.1, label_key(p.2)).cmp(&(&q.0, &q.1, label_key(q.2))));
    out
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn graph_dot(graph: &EntanglementGraph) -> String {
    if graph.is_empty() {
        return "graph entanglement { }\n".to_string();
    }
    let nodes: BTreeSet<String> = graph.nodes().iter().map(ToString::to_string).collect();
    let mut out = String::from("graph entanglement {\n");
    for n in &nodes {
        let _ = writeln!(out, "  {};", quoted(n));
    }
    for (a, b, label) in sorted_edges(graph) {
        let _ = writeln!(out, "  {} -- {} [label={}];", quoted(&a), quoted(&b), quoted(label));
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct EdgeJson<'a> {
    a: String,
    b: String,
    line: &'a str,
}

fn edges_json(graph: &EntanglementGraph) -> Vec<EdgeJson<'_>> {
    sorted_edges(graph).into_iter().map(|(a, b, line)| EdgeJson { a, b, line }).collect()
}

/// Every qubit the state knows about plus `universe`, by display name.
fn known_qubits<'a>(st: &'a AnalysisState, universe: &'a [QubitRef]) -> BTreeMap<String, &'a QubitRef> {
    st.states
        .keys()
        .chain(st.stacks.keys())
        .chain(st.graph.nodes())
        .chain(universe)
        .map(|q| (q.to_string(), q))
        .collect()
}

pub fn graph_json_value(st: &AnalysisState, universe: &[QubitRef]) -> serde_json::Value {
    let qubits: Vec<_> =
        known_qubits(st, universe).into_iter().map(|(name, q)| json!({"name": name, "state": st.state(q)})).collect();
    let mut components: Vec<Vec<String>> = st
        .graph
        .components()
        .into_iter()
        .map(|c| {
            let mut names: Vec<String> = c.iter().map(ToString::to_string).collect();
            names.sort();
            names
        })
        .collect();
    components.sort();
    json!({"qubits": qubits, "edges": edges_json(&st.graph), "components": components})
}

pub fn graph_json(st: &AnalysisState, universe: &[QubitRef]) -> String {
    pretty(&graph_json_value(st, universe))
}

pub fn emit_graph(st: &AnalysisState, universe: &[QubitRef], format: OutputFormat) -> String {
    match format {
        OutputFormat::Dot => graph_dot(&st.graph),
        OutputFormat::Json => graph_json(st, universe),
    }
}

fn stack_labels(stack: &[StackEntry]) -> Vec<String> {
    stack.iter().map(StackEntry::label).collect()
}

/// One object per program point, in execution order.
pub fn per_point_value(result: &AnalysisResult, universe: &[QubitRef]) -> serde_json::Value {
    let points: Vec<_> = result
        .snapshots
        .iter()
        .map(|s| {
            let known = known_qubits(&s.state, universe);
            let states: BTreeMap<&String, QubitState> = known.iter().map(|(n, q)| (n, s.state.state(q))).collect();
            let stacks: BTreeMap<&String, Vec<String>> =
                known.iter().map(|(n, q)| (n, stack_labels(s.state.stack(q)))).collect();
            json!({
                "point": s.point.to_string(),
                "states": states,
                "stacks": stacks,
                "edges": edges_json(&s.state.graph),
            })
        })
        .collect();
    serde_json::Value::Array(points)
}

pub fn per_point_json(result: &AnalysisResult, universe: &[QubitRef]) -> String {
    pretty(&per_point_value(result, universe))
}

pub fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Edges as `(a, b, label)` display triples, for tests and bindings.
pub fn edge_triples(edges: &BTreeSet<Edge>) -> Vec<(String, String, String)> {
    edges.iter().map(|e| (e.a.to_string(), e.b.to_string(), e.label.clone())).collect()
}
