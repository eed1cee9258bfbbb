//! Abstract state: qubit states, operation stacks and the entanglement graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::normalize::{OperationLine, QubitRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum QubitState {
    Zero,
    One,
    Q,
}

impl QubitState {
    pub fn is_classical(self) -> bool {
        self != QubitState::Q
    }

    pub fn flipped(self) -> Self {
        match self {
            QubitState::Zero => QubitState::One,
            QubitState::One => QubitState::Zero,
            QubitState::Q => QubitState::Q,
        }
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QubitState::Zero => "Zero",
            QubitState::One => "One",
            QubitState::Q => "Q",
        })
    }
}

/// How the stack owner takes part in the recorded line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Target,
    Control,
    /// Phase kicked back onto a Q control from a classical target.
    Kickback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpEntry {
    pub label: String,
    pub line: OperationLine,
    pub role: Role,
    /// Magnitude versions of every control qubit when the line ran.
    pub control_versions: BTreeMap<QubitRef, u64>,
    /// Target's version before the push; restored when the entry is cancelled.
    pub prev_version: u64,
    /// Classical target state for kickback entries.
    pub target_state: Option<QubitState>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum StackEntry {
    /// Classical state the qubit had before it entered Q.
    Origin(QubitState),
    /// Bottom of a summary formal's stack: the caller's history is unknown.
    Boundary,
    Op(OpEntry),
}

impl StackEntry {
    pub fn label(&self) -> String {
        match self {
            StackEntry::Origin(s) => format!("origin({s})"),
            StackEntry::Boundary => "boundary".into(),
            StackEntry::Op(e) => e.label.clone(),
        }
    }

    /// Label-free description used to compare stacks across runs.
    pub fn signature(&self) -> String {
        match self {
            StackEntry::Op(e) => format!("{:?}:{}", e.role, e.line.signature()),
            other => other.label(),
        }
    }

    pub fn as_op(&self) -> Option<&OpEntry> {
        match self {
            StackEntry::Op(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge {
    pub a: QubitRef,
    pub b: QubitRef,
    pub label: String,
}

impl Edge {
    pub fn new(x: QubitRef, y: QubitRef, label: impl Into<String>) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        Self { a, b, label: label.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntanglementGraph {
    nodes: BTreeSet<QubitRef>,
    edges: BTreeSet<Edge>,
}

impl EntanglementGraph {
    pub fn nodes(&self) -> &BTreeSet<QubitRef> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_node(&mut self, q: QubitRef) {
        self.nodes.insert(q);
    }

    pub fn add_edge(&mut self, x: &QubitRef, y: &QubitRef, label: &str) {
        if x == y {
            return;
        }
        self.nodes.insert(x.clone());
        self.nodes.insert(y.clone());
        self.edges.insert(Edge::new(x.clone(), y.clone(), label));
    }

    pub fn remove_label(&mut self, label: &str) {
        self.edges.retain(|e| e.label != label);
    }

    pub fn neighbors(&self, q: &QubitRef) -> BTreeSet<&QubitRef> {
        self.edges
            .iter()
            .filter_map(|e| {
                if &e.a == q {
                    Some(&e.b)
                } else if &e.b == q {
                    Some(&e.a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Delete `q`, first connecting each pair of its former neighbors so
    /// entanglement through `q` stays visible.
    pub fn remove_node(&mut self, q: &QubitRef) {
        let incident: Vec<Edge> = self.edges.iter().filter(|e| &e.a == q || &e.b == q).cloned().collect();
        let mut via: BTreeMap<QubitRef, String> = BTreeMap::new();
        for e in &incident {
            let other = if &e.a == q { &e.b } else { &e.a };
            let slot = via.entry(other.clone()).or_insert_with(|| e.label.clone());
            if e.label < *slot {
                *slot = e.label.clone();
            }
        }
        let others: Vec<(QubitRef, String)> = via.into_iter().collect();
        for i in 0..others.len() {
            for j in i + 1..others.len() {
                let label = std::cmp::min(&others[i].1, &others[j].1).clone();
                self.edges.insert(Edge::new(others[i].0.clone(), others[j].0.clone(), label));
            }
        }
        self.edges.retain(|e| &e.a != q && &e.b != q);
        self.nodes.remove(q);
    }

    /// Drop every edge at `q` while keeping the node.
    pub fn isolate(&mut self, q: &QubitRef) {
        self.edges.retain(|e| &e.a != q && &e.b != q);
    }

    /// Edge labels: the entangle set.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.label.as_str()).collect()
    }

    /// Connected components over the nodes, each sorted, in node order.
    pub fn components(&self) -> Vec<Vec<QubitRef>> {
        let mut parent: BTreeMap<&QubitRef, &QubitRef> = self.nodes.iter().map(|n| (n, n)).collect();
        fn find<'a>(p: &mut BTreeMap<&'a QubitRef, &'a QubitRef>, x: &'a QubitRef) -> &'a QubitRef {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let n = p[c];
                p.insert(c, r);
                c = n;
            }
            r
        }
        for e in &self.edges {
            let (ra, rb) = (find(&mut parent, &e.a), find(&mut parent, &e.b));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent.insert(hi, lo);
            }
        }
        let mut groups: BTreeMap<&QubitRef, Vec<QubitRef>> = BTreeMap::new();
        for n in &self.nodes {
            let r = find(&mut parent, n);
            groups.entry(r).or_default().push(n.clone());
        }
        groups.into_values().collect()
    }
}

/// The analysis facts at one program point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalysisState {
    /// Qubits not listed are Zero.
    pub states: BTreeMap<QubitRef, QubitState>,
    pub stacks: BTreeMap<QubitRef, Vec<StackEntry>>,
    pub graph: EntanglementGraph,
    pub versions: BTreeMap<QubitRef, u64>,
    pub(crate) next_version: u64,
}

impl AnalysisState {
    pub fn new() -> Self {
        Self::default()
    }

    /// State where every given qubit is Q with a boundary-marked stack.
    pub fn all_q(qubits: &[QubitRef]) -> Self {
        let mut st = Self::new();
        for q in qubits {
            st.states.insert(q.clone(), QubitState::Q);
            st.stacks.insert(q.clone(), vec![StackEntry::Boundary]);
            st.graph.add_node(q.clone());
        }
        st
    }

    pub fn state(&self, q: &QubitRef) -> QubitState {
        self.states.get(q).copied().unwrap_or(QubitState::Zero)
    }

    pub fn version(&self, q: &QubitRef) -> u64 {
        self.versions.get(q).copied().unwrap_or(0)
    }

    pub(crate) fn fresh_version(&mut self) -> u64 {
        self.next_version += 1;
        self.next_version
    }

    pub fn stack(&self, q: &QubitRef) -> &[StackEntry] {
        self.stacks.get(q).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entangle(&self) -> BTreeSet<&str> {
        self.graph.labels()
    }

    /// Components of the graph plus a singleton for each listed qubit that is
    /// not a graph node.
    pub fn partition(&self, universe: &[QubitRef]) -> Vec<Vec<QubitRef>> {
        let mut out = self.graph.components();
        for q in universe {
            if !self.graph.nodes().contains(q) {
                out.push(vec![q.clone()]);
            }
        }
        out
    }

    /// Stacks as label-free signatures, for comparing runs.
    pub fn stack_signatures(&self) -> BTreeMap<QubitRef, Vec<String>> {
        self.stacks.iter().map(|(q, s)| (q.clone(), s.iter().map(StackEntry::signature).collect())).collect()
    }

    /// Check the cross-component invariants; returns the first violation.
    pub fn check_consistency(&self) -> Result<(), String> {
        let q_set: BTreeSet<&QubitRef> =
            self.states.iter().filter(|(_, s)| **s == QubitState::Q).map(|(q, _)| q).collect();
        let nodes: BTreeSet<&QubitRef> = self.graph.nodes().iter().collect();
        if q_set != nodes {
            return Err(format!("graph nodes {nodes:?} differ from Q qubits {q_set:?}"));
        }
        for q in &q_set {
            match self.stacks.get(*q) {
                Some(s) if !s.is_empty() => {}
                _ => return Err(format!("Q qubit {q} has no stack")),
            }
        }
        for q in self.stacks.keys() {
            if !q_set.contains(q) {
                return Err(format!("classical qubit {q} owns a stack"));
            }
        }
        for e in self.graph.edges() {
            if !nodes.contains(&e.a) || !nodes.contains(&e.b) {
                return Err(format!("edge {} -- {} has a missing endpoint", e.a, e.b));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: usize) -> QubitRef {
        QubitRef::indexed("q", i)
    }

    #[test]
    fn components_and_reconnect() {
        let mut g = EntanglementGraph::default();
        g.add_edge(&q(0), &q(1), "L1");
        g.add_edge(&q(1), &q(2), "L2");
        g.add_node(q(3));
        assert_eq!(g.components(), vec![vec![q(0), q(1), q(2)], vec![q(3)]]);
        g.remove_node(&q(1));
        assert_eq!(g.components(), vec![vec![q(0), q(2)], vec![q(3)]]);
        assert_eq!(g.labels(), BTreeSet::from(["L1"]));
    }

    #[test]
    fn remove_label_keeps_nodes() {
        let mut g = EntanglementGraph::default();
        g.add_edge(&q(0), &q(1), "L1");
        g.add_edge(&q(0), &q(1), "L2");
        g.remove_label("L1");
        assert_eq!(g.edges().len(), 1);
        g.remove_label("L2");
        assert_eq!(g.components(), vec![vec![q(0)], vec![q(1)]]);
    }

    #[test]
    fn all_q_is_consistent() {
        let st = AnalysisState::all_q(&[q(0), q(1)]);
        st.check_consistency().unwrap();
        assert_eq!(st.state(&q(5)), QubitState::Zero);
    }
}
