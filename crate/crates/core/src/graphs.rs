//! Per-operation CFGs, the call graph and the ICFG.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use crate::normalize::{LoweredOperation, LoweredProgram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("recursion detected: {}", .0.join(" -> "))]
    RecursionDetected(Vec<String>),
}

/// First cycle found by a depth-first walk in key order, as a closed path.
pub fn find_cycle(adj: &BTreeMap<String, BTreeSet<String>>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit<'a>(
        n: &'a str,
        adj: &'a BTreeMap<String, BTreeSet<String>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        path: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        marks.insert(n, Mark::Open);
        path.push(n);
        for m in adj.get(n).into_iter().flatten() {
            match marks.get(m.as_str()) {
                Some(Mark::Open) => {
                    let start = path.iter().position(|p| *p == m).expect("open node on path");
                    let mut cycle: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(m.clone());
                    return Some(cycle);
                }
                Some(Mark::Done) => {}
                None => {
                    if let Some(c) = visit(m, adj, marks, path) {
                        return Some(c);
                    }
                }
            }
        }
        path.pop();
        marks.insert(n, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for n in adj.keys() {
        if !marks.contains_key(n.as_str()) {
            if let Some(c) = visit(n, adj, &mut marks, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CfgNode {
    Enter,
    Line(usize),
    Exit,
}

/// Straight-line CFG: enter → line 0 → … → line k → exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub op: String,
    pub len: usize,
}

impl Cfg {
    pub fn nodes(&self) -> Vec<CfgNode> {
        let mut v = vec![CfgNode::Enter];
        v.extend((0..self.len).map(CfgNode::Line));
        v.push(CfgNode::Exit);
        v
    }

    pub fn edges(&self) -> Vec<(CfgNode, CfgNode)> {
        let n = self.nodes();
        n.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn succ(&self, n: CfgNode) -> Option<CfgNode> {
        match n {
            CfgNode::Enter if self.len == 0 => Some(CfgNode::Exit),
            CfgNode::Enter => Some(CfgNode::Line(0)),
            CfgNode::Line(i) if i + 1 < self.len => Some(CfgNode::Line(i + 1)),
            CfgNode::Line(i) if i < self.len => Some(CfgNode::Exit),
            _ => None,
        }
    }

    pub fn pred(&self, n: CfgNode) -> Option<CfgNode> {
        match n {
            CfgNode::Exit if self.len == 0 => Some(CfgNode::Enter),
            CfgNode::Exit => Some(CfgNode::Line(self.len - 1)),
            CfgNode::Line(0) if self.len > 0 => Some(CfgNode::Enter),
            CfgNode::Line(i) if i < self.len => Some(CfgNode::Line(i - 1)),
            _ => None,
        }
    }
}

pub fn build_cfg(op: &LoweredOperation) -> Cfg {
    Cfg { op: op.name.clone(), len: op.lines.len() }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CallEdge {
    pub site: usize,
    pub caller: String,
    pub callee: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<CallEdge>,
}

impl CallGraph {
    /// Operations the call site may invoke. Always a singleton here: the
    /// subset has no operation-valued variables.
    pub fn callees(&self, caller: &str, site: usize) -> BTreeSet<&str> {
        self.edges.iter().filter(|e| e.caller == caller && e.site == site).map(|e| e.callee.as_str()).collect()
    }

    pub fn callees_of(&self, caller: &str) -> BTreeSet<&str> {
        self.edges.iter().filter(|e| e.caller == caller).map(|e| e.callee.as_str()).collect()
    }

    pub fn callers(&self, callee: &str) -> BTreeSet<&str> {
        self.edges.iter().filter(|e| e.callee == callee).map(|e| e.caller.as_str()).collect()
    }

    fn adjacency(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut adj: BTreeMap<String, BTreeSet<String>> =
            self.nodes.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
        for e in &self.edges {
            adj.entry(e.caller.clone()).or_default().insert(e.callee.clone());
        }
        adj
    }

    pub fn check_acyclic(&self) -> Result<(), GraphError> {
        match find_cycle(&self.adjacency()) {
            Some(c) => Err(GraphError::RecursionDetected(c)),
            None => Ok(()),
        }
    }

    /// Callees before callers; ties follow node order.
    pub fn summary_order(&self) -> Result<Vec<String>, GraphError> {
        self.check_acyclic()?;
        let adj = self.adjacency();
        let mut done = BTreeSet::new();
        let mut out = Vec::new();
        fn post(n: &str, adj: &BTreeMap<String, BTreeSet<String>>, done: &mut BTreeSet<String>, out: &mut Vec<String>) {
            if !done.insert(n.to_string()) {
                return;
            }
            for m in adj.get(n).into_iter().flatten() {
                post(m, adj, done, out);
            }
            out.push(n.to_string());
        }
        for n in &self.nodes {
            post(n, &adj, &mut done, &mut out);
        }
        Ok(out)
    }
}

pub fn build_call_graph(program: &LoweredProgram) -> Result<CallGraph, GraphError> {
    let nodes: Vec<String> = program.ops.iter().map(|o| o.name.clone()).collect();
    let mut edges = Vec::new();
    for op in &program.ops {
        for l in &op.lines {
            if let Some(c) = l.callee() {
                edges.push(CallEdge { site: l.id, caller: op.name.clone(), callee: nodes[c].clone() });
            }
        }
    }
    let cg = CallGraph { nodes, edges };
    cg.check_acyclic()?;
    Ok(cg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Intra,
    Call,
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcfgNode {
    pub op: String,
    pub node: CfgNode,
}

impl IcfgNode {
    pub fn label(&self) -> String {
        match self.node {
            CfgNode::Enter => format!("{}:enter", self.op),
            CfgNode::Line(i) => format!("{}:{}", self.op, i),
            CfgNode::Exit => format!("{}:exit", self.op),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Icfg {
    pub cfgs: Vec<Cfg>,
    pub nodes: Vec<IcfgNode>,
    pub edges: Vec<(usize, usize, EdgeKind)>,
    /// Callees before callers.
    pub summary_order: Vec<String>,
}

impl Icfg {
    pub fn node_index(&self, op: &str, node: CfgNode) -> Option<usize> {
        self.nodes.iter().position(|n| n.op == op && n.node == node)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph icfg {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{}\";", n.label());
        }
        for (a, b, k) in &self.edges {
            let style = if *k == EdgeKind::Intra { "" } else { " [style=dashed]" };
            let _ = writeln!(out, "  \"{}\" -> \"{}\"{};", self.nodes[*a].label(), self.nodes[*b].label(), style);
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_icfg(cfgs: &[Cfg], cg: &CallGraph) -> Result<Icfg, GraphError> {
    let summary_order = cg.summary_order()?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut base = BTreeMap::new();
    for cfg in cfgs {
        let start = nodes.len();
        base.insert(cfg.op.clone(), start);
        for n in cfg.nodes() {
            nodes.push(IcfgNode { op: cfg.op.clone(), node: n });
        }
        for i in 0..=cfg.len {
            edges.push((start + i, start + i + 1, EdgeKind::Intra));
        }
    }
    for e in &cg.edges {
        let (Some(&caller), Some(&callee)) = (base.get(&e.caller), base.get(&e.callee)) else {
            continue;
        };
        let site = caller + 1 + e.site;
        let callee_len = cfgs.iter().find(|c| c.op == e.callee).map_or(0, |c| c.len);
        edges.push((site, callee, EdgeKind::Call));
        edges.push((callee + callee_len + 1, site, EdgeKind::Return));
    }
    Ok(Icfg { cfgs: cfgs.to_vec(), nodes, edges, summary_order })
}

/// All three graphs for a lowered program.
pub fn build_graphs(program: &LoweredProgram) -> Result<(Vec<Cfg>, CallGraph, Icfg), GraphError> {
    let cfgs: Vec<Cfg> = program.ops.iter().map(build_cfg).collect();
    let cg = build_call_graph(program)?;
    let icfg = build_icfg(&cfgs, &cg)?;
    Ok((cfgs, cg, icfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj(pairs: &[(&str, &str)]) -> BTreeMap<String, BTreeSet<String>> {
        let mut m: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (a, b) in pairs {
            m.entry(a.to_string()).or_default().insert(b.to_string());
            m.entry(b.to_string()).or_default();
        }
        m
    }

    #[test]
    fn cycles() {
        assert_eq!(find_cycle(&adj(&[("A", "B"), ("B", "C")])), None);
        assert_eq!(find_cycle(&adj(&[("A", "B"), ("B", "A")])), Some(vec!["A".into(), "B".into(), "A".into()]));
        assert_eq!(find_cycle(&adj(&[("A", "A")])), Some(vec!["A".into(), "A".into()]));
    }

    #[test]
    fn cfg_chain() {
        let c = Cfg { op: "G".into(), len: 3 };
        assert_eq!(c.nodes().len(), 5);
        assert_eq!(c.edges().len(), 4);
        assert_eq!(c.pred(CfgNode::Enter), None);
        assert_eq!(c.succ(CfgNode::Exit), None);
        for n in c.nodes() {
            if let Some(s) = c.succ(n) {
                assert_eq!(c.pred(s), Some(n));
            }
        }
        let e = Cfg { op: "E".into(), len: 0 };
        assert_eq!(e.edges(), vec![(CfgNode::Enter, CfgNode::Exit)]);
    }

    #[test]
    fn summary_order_is_reverse_topological() {
        let cg = CallGraph {
            nodes: vec!["A".into(), "B".into(), "C".into()],
            edges: vec![
                CallEdge { site: 0, caller: "A".into(), callee: "B".into() },
                CallEdge { site: 0, caller: "B".into(), callee: "C".into() },
            ],
        };
        assert_eq!(cg.summary_order().unwrap(), ["C", "B", "A"]);
        assert_eq!(cg.callers("C"), BTreeSet::from(["B"]));
        assert_eq!(cg.callees("A", 0), BTreeSet::from(["B"]));
    }

    #[test]
    fn recursion_in_call_graph() {
        let cg = CallGraph {
            nodes: vec!["A".into(), "B".into()],
            edges: vec![
                CallEdge { site: 0, caller: "A".into(), callee: "B".into() },
                CallEdge { site: 1, caller: "B".into(), callee: "A".into() },
            ],
        };
        assert!(matches!(cg.check_acyclic(), Err(GraphError::RecursionDetected(_))));
        assert!(build_icfg(&[], &cg).is_err());
    }
}
