mod common;

use common::{analyze, fixture};
use jiuchan::analysis::AnalysisConfig;
use jiuchan::graphs::{build_cfg, build_graphs, CallEdge, CallGraph, CfgNode, EdgeKind, GraphError};
use jiuchan::normalize::{LowerError, LowerOptions};
use jiuchan::{analyze_source, Error};

const CHAIN: &str = "namespace T {
    operation C(x : Qubit) : Unit { H(x); }
    operation B(x : Qubit) : Unit { C(x); X(x); }
    @EntryPoint()
    operation A() : Unit { use q = Qubit(); B(q); T(q); }
}";

#[test]
fn cfg_shapes() {
    let a = analyze(&fixture("sample.qs"));
    let ghz = build_cfg(a.program.find("GHZ").unwrap());
    assert_eq!((ghz.nodes().len(), ghz.edges().len()), (5, 4));
    let main = build_cfg(a.program.entry_op());
    assert_eq!((main.nodes().len(), main.edges().len()), (14, 13));
    let empty = analyze("namespace T { @EntryPoint() operation E() : Unit { } }");
    let cfg = build_cfg(empty.program.entry_op());
    assert_eq!(cfg.edges(), [(CfgNode::Enter, CfgNode::Exit)]);
}

#[test]
fn cfg_neighbors() {
    let a = analyze(&fixture("sample.qs"));
    let cfg = build_cfg(a.program.entry_op());
    assert_eq!(cfg.pred(CfgNode::Enter), None);
    assert_eq!(cfg.succ(CfgNode::Exit), None);
    for n in cfg.nodes() {
        if let Some(s) = cfg.succ(n) {
            assert_eq!(cfg.pred(s), Some(n));
        }
        if let Some(p) = cfg.pred(n) {
            assert_eq!(cfg.succ(p), Some(n));
        }
        if matches!(n, CfgNode::Line(_)) {
            assert!(cfg.pred(n).is_some() && cfg.succ(n).is_some());
        }
    }
    // Every node is reachable from enter.
    let mut seen = vec![CfgNode::Enter];
    while let Some(s) = cfg.succ(*seen.last().unwrap()) {
        seen.push(s);
    }
    assert_eq!(seen, cfg.nodes());
}

#[test]
fn sample_call_graph() {
    let a = analyze(&fixture("sample.qs"));
    let (_, cg, icfg) = build_graphs(&a.program).unwrap();
    assert_eq!(cg.edges, [CallEdge { site: 6, caller: "Entangle_test".into(), callee: "GHZ".into() }]);
    assert_eq!(cg.callees("Entangle_test", 6).into_iter().collect::<Vec<_>>(), ["GHZ"]);
    assert!(cg.callees("Entangle_test", 5).is_empty());
    assert_eq!(cg.callers("GHZ").into_iter().collect::<Vec<_>>(), ["Entangle_test"]);

    let site = icfg.node_index("Entangle_test", CfgNode::Line(6)).unwrap();
    let enter = icfg.node_index("GHZ", CfgNode::Enter).unwrap();
    let exit = icfg.node_index("GHZ", CfgNode::Exit).unwrap();
    assert!(icfg.edges.contains(&(site, enter, EdgeKind::Call)));
    assert!(icfg.edges.contains(&(exit, site, EdgeKind::Return)));
    assert_eq!(icfg.summary_order.first().map(String::as_str), Some("GHZ"));
}

#[test]
fn icfg_counts() {
    for src in [fixture("sample.qs"), CHAIN.to_string()] {
        let a = analyze(&src);
        let (cfgs, cg, icfg) = build_graphs(&a.program).unwrap();
        let nodes: usize = a.program.ops.iter().map(|o| o.lines.len() + 2).sum();
        let intra: usize = cfgs.iter().map(|c| c.edges().len()).sum();
        assert_eq!(icfg.nodes.len(), nodes);
        assert_eq!(icfg.edges.len(), intra + 2 * cg.edges.len());
        // Projection onto each operation recovers its CFG.
        for cfg in &cfgs {
            let projected: Vec<(CfgNode, CfgNode)> = icfg
                .edges
                .iter()
                .filter(|(x, y, k)| *k == EdgeKind::Intra && icfg.nodes[*x].op == cfg.op && icfg.nodes[*y].op == cfg.op)
                .map(|(x, y, _)| (icfg.nodes[*x].node, icfg.nodes[*y].node))
                .collect();
            assert_eq!(projected, cfg.edges());
        }
    }
}

#[test]
fn no_calls() {
    let a = analyze("namespace T { @EntryPoint() operation E() : Unit { use q = Qubit(); H(q); } }");
    let (cfgs, cg, icfg) = build_graphs(&a.program).unwrap();
    assert!(cg.edges.is_empty());
    assert_eq!(cg.nodes, ["E"]);
    assert_eq!(icfg.edges.len(), cfgs[0].edges().len());
}

#[test]
fn chain_order() {
    let a = analyze(CHAIN);
    let (_, cg, icfg) = build_graphs(&a.program).unwrap();
    assert_eq!(cg.edges.len(), 2);
    assert_eq!(icfg.summary_order, ["C", "B", "A"]);
    assert_eq!(cg.callees_of("B").into_iter().collect::<Vec<_>>(), ["C"]);
}

#[test]
fn dot_marks_call_edges() {
    let a = analyze(&fixture("sample.qs"));
    let (_, _, icfg) = build_graphs(&a.program).unwrap();
    let dot = icfg.to_dot();
    assert!(dot.starts_with("digraph icfg {\n"));
    assert!(dot.contains("\"Entangle_test:6\" -> \"GHZ:enter\" [style=dashed];"), "{dot}");
    assert!(dot.contains("\"GHZ:exit\" -> \"Entangle_test:6\" [style=dashed];"));
    assert!(dot.contains("\"GHZ:0\" -> \"GHZ:1\";"));
    assert_eq!(dot, build_graphs(&a.program).unwrap().2.to_dot());
}

#[test]
fn cycle_detection() {
    let edge = |s, a: &str, b: &str| CallEdge { site: s, caller: a.into(), callee: b.into() };
    let cg = CallGraph {
        nodes: vec!["A".into(), "B".into(), "C".into()],
        edges: vec![edge(0, "A", "B"), edge(0, "B", "C"), edge(1, "C", "A")],
    };
    assert_eq!(
        cg.check_acyclic(),
        Err(GraphError::RecursionDetected(vec!["A".into(), "B".into(), "C".into(), "A".into()]))
    );
    assert!(cg.summary_order().is_err());
}

#[test]
fn recursion_rejected_end_to_end() {
    let src = "namespace T {
        operation P(x : Qubit) : Unit { H(x); Q(x); }
        operation Q(x : Qubit) : Unit { P(x); }
        @EntryPoint() operation M() : Unit { use q = Qubit(); P(q); }
    }";
    let err = analyze_source(src, None, &LowerOptions::default(), &AnalysisConfig::default()).unwrap_err();
    assert!(
        matches!(err, Error::Lower(LowerError::RecursionDetected(_)) | Error::Graph(GraphError::RecursionDetected(_))),
        "{err}"
    );
    assert!(err.to_string().contains("recursion detected"));
}
