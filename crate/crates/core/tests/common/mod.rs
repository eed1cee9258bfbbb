#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use jiuchan::analysis::{AnalysisConfig, AnalysisState, QubitState, StackEntry};
use jiuchan::normalize::{ClassicalValue, LowerOptions, QubitRef};
use jiuchan::{analyze_source, Analyzed};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn analyze(src: &str) -> Analyzed {
    analyze_source(src, None, &LowerOptions::default(), &AnalysisConfig::default()).unwrap()
}

pub fn analyze_bound(src: &str, bindings: &[(&str, i64)]) -> Analyzed {
    let mut opts = LowerOptions::default();
    for (k, v) in bindings {
        opts.bindings.insert(k.to_string(), ClassicalValue::Int(*v));
    }
    analyze_source(src, None, &opts, &AnalysisConfig::default()).unwrap()
}

pub fn q(base: &str, i: usize) -> QubitRef {
    QubitRef::indexed(base, i)
}

pub fn names(qs: &[QubitRef]) -> Vec<String> {
    qs.iter().map(ToString::to_string).collect()
}

/// Components of the exit graph as sorted display names.
pub fn components(st: &AnalysisState) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = st
        .graph
        .components()
        .iter()
        .map(|c| {
            let mut v = names(c);
            v.sort();
            v
        })
        .collect();
    out.sort();
    out
}

pub fn stack_labels(st: &AnalysisState, q: &QubitRef) -> Vec<String> {
    st.stack(q).iter().map(StackEntry::label).collect()
}

pub fn edge_set(st: &AnalysisState) -> Vec<(String, String, String)> {
    jiuchan::emit::edge_triples(st.graph.edges())
}

/// Every qubit is classical, the graph is empty and no stack holds an
/// operation entry.
pub fn is_fully_uncomputed(st: &AnalysisState, origin: QubitState) -> Result<(), String> {
    if !st.graph.is_empty() || !st.graph.edges().is_empty() {
        return Err(format!("graph not empty: {:?}", st.graph));
    }
    for (q, s) in &st.states {
        if *s != origin {
            return Err(format!("{q} ends in {s}, expected {origin}"));
        }
    }
    for (q, s) in &st.stacks {
        if s.iter().any(|e| e.as_op().is_some()) {
            return Err(format!("{q} still has stack {:?}", s.iter().map(StackEntry::label).collect::<Vec<_>>()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random programs rendered as source text.

pub const ZERO_PARAM: [&str; 6] = ["X", "Y", "Z", "H", "S", "T"];
pub const ONE_PARAM: [&str; 4] = ["R1", "Rz", "Rx", "Ry"];
pub const ANGLES: [&str; 7] = ["PI()/2.0", "PI()/4.0", "-PI()/4.0", "3.0*PI()/4.0", "0.3", "-1.25", "PI()"];

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: &'static str,
    pub angle: Option<&'static str>,
    pub controls: Vec<usize>,
    pub target: usize,
    pub adjoint: bool,
}

impl Gate {
    pub fn render(&self, reg: &str) -> String {
        let qb = |i: usize| format!("{reg}[{i}]");
        let adj = if self.adjoint { "Adjoint " } else { "" };
        let inner = match self.angle {
            Some(a) => format!("{a}, {}", qb(self.target)),
            None => qb(self.target),
        };
        if self.controls.is_empty() {
            format!("{adj}{}({inner});", self.name)
        } else {
            let ctl = self.controls.iter().map(|&c| qb(c)).collect::<Vec<_>>().join(", ");
            let arg = if self.angle.is_some() { format!("({inner})") } else { inner };
            format!("{adj}Controlled {}([{ctl}], {arg});", self.name)
        }
    }

    pub fn inverse(&self) -> Gate {
        Gate { adjoint: !self.adjoint, ..self.clone() }
    }
}

pub fn random_gate(rng: &mut ChaCha8Rng, n: usize, max_controls: usize) -> Gate {
    let with_param = rng.random_bool(0.35);
    let name = if with_param { *ONE_PARAM.choose(rng).unwrap() } else { *ZERO_PARAM.choose(rng).unwrap() };
    let angle = with_param.then(|| *ANGLES.choose(rng).unwrap());
    let target = rng.random_range(0..n);
    let mut controls = Vec::new();
    let k = rng.random_range(0..=max_controls.min(n - 1));
    while controls.len() < k {
        let c = rng.random_range(0..n);
        if c != target && !controls.contains(&c) {
            controls.push(c);
        }
    }
    Gate { name, angle, controls, target, adjoint: rng.random_bool(0.2) }
}

pub fn random_sequence(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<Gate> {
    (0..len).map(|_| random_gate(rng, n, 2)).collect()
}

pub fn entry_program(n: usize, params: &str, body: &[String], extra: &str) -> String {
    let mut s = String::from("namespace Rand {\n");
    s.push_str(extra);
    s.push_str(&format!("    @EntryPoint()\n    operation Main({params}) : Unit {{\n        use q = Qubit[{n}];\n"));
    for l in body {
        s.push_str("        ");
        s.push_str(l);
        s.push('\n');
    }
    s.push_str("    }\n}\n");
    s
}

/// `B` followed by its inverse: adjoint of each gate in reverse order.
pub fn round_trip_program(n: usize, seq: &[Gate]) -> String {
    let mut body: Vec<String> = seq.iter().map(|g| g.render("q")).collect();
    body.extend(seq.iter().rev().map(|g| g.inverse().render("q")));
    entry_program(n, "", &body, "")
}

pub const ATOMS: [&str; 3] = ["a", "b", "c"];

/// A random entry operation over up to `n` qubits and three classical
/// parameters, with at most one call to a random sub-operation.
#[derive(Debug, Clone)]
pub struct RandomProgram {
    pub qubits: usize,
    pub source: String,
    pub lines: usize,
}

pub fn random_program(rng: &mut ChaCha8Rng, max_qubits: usize, max_lines: usize) -> RandomProgram {
    random_program_with(rng, max_qubits, max_lines, 0.5)
}

pub fn random_program_with(rng: &mut ChaCha8Rng, max_qubits: usize, max_lines: usize, call_prob: f64) -> RandomProgram {
    let n = rng.random_range(3..=max_qubits);
    let target_lines = rng.random_range(4..=max_lines);
    let mut body = Vec::new();
    let mut history: Vec<Gate> = Vec::new();
    let mut lines = 0;
    let mut extra = String::new();
    let with_call = rng.random_bool(call_prob);
    // Seed some superposition so later gates have something to entangle.
    for i in 0..n {
        if lines + 1 < target_lines && rng.random_bool(0.5) {
            body.push(format!("H(q[{i}]);"));
            lines += 1;
        }
    }
    let call_at = rng.random_range(lines..target_lines);
    while lines < target_lines {
        if with_call && lines == call_at {
            let m = rng.random_range(1..=3.min(n - 1));
            let len = rng.random_range(1..=4);
            let sub: Vec<String> = random_sequence(rng, m, len).iter().map(|g| g.render("r")).collect();
            extra = format!(
                "    operation Sub(r : Qubit[]) : Unit is Adj + Ctl {{\n{}    }}\n",
                sub.iter().map(|l| format!("        {l}\n")).collect::<String>()
            );
            let mut picks: Vec<usize> = (0..n).collect();
            let mut chosen = Vec::new();
            for _ in 0..m {
                let i = rng.random_range(0..picks.len());
                chosen.push(picks.swap_remove(i));
            }
            let args = chosen.iter().map(|i| format!("q[{i}]")).collect::<Vec<_>>().join(", ");
            let call = match rng.random_range(0..3) {
                0 => format!("Sub([{args}]);"),
                1 => format!("Adjoint Sub([{args}]);"),
                _ => {
                    let c = picks[rng.random_range(0..picks.len())];
                    format!("Controlled Sub([q[{c}]], [{args}]);")
                }
            };
            body.push(wrap_condition(rng, call));
            lines += 1;
            continue;
        }
        let g = if !history.is_empty() && rng.random_bool(0.3) {
            history[rng.random_range(0..history.len())].inverse()
        } else {
            random_gate(rng, n, 2)
        };
        history.push(g.clone());
        body.push(wrap_condition(rng, g.render("q")));
        lines += 1;
    }
    let source = entry_program(n, "a : Int, b : Int, c : Int", &body, &extra);
    RandomProgram { qubits: n, source, lines }
}

fn wrap_condition(rng: &mut ChaCha8Rng, stmt: String) -> String {
    if rng.random_bool(0.3) {
        let a = ATOMS.choose(rng).unwrap();
        if rng.random_bool(0.25) {
            format!("if {a} == 1 {{ }} else {{ {stmt} }}")
        } else {
            format!("if {a} == 1 {{ {stmt} }}")
        }
    } else {
        stmt
    }
}

pub fn empty_assumptions() -> BTreeMap<String, bool> {
    BTreeMap::new()
}
