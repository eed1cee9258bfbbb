mod common;

use common::{fixture, q};
use jiuchan::frontend::{parse_str, resolve_references};
use jiuchan::normalize::{
    flatten_program, lower_program, wrap_lines, Functor, GateParam, LabeledLine, LowerError, LowerOptions,
    LoweredProgram, QubitRef,
};

fn lower(src: &str) -> Result<LoweredProgram, LowerError> {
    lower_with(src, &LowerOptions::default())
}

fn lower_with(src: &str, opts: &LowerOptions) -> Result<LoweredProgram, LowerError> {
    let resolved = resolve_references(parse_str(src).unwrap().namespace, None).unwrap();
    lower_program(&resolved, opts)
}

fn entry(body: &str) -> String {
    format!("namespace T {{ @EntryPoint() operation M(a : Int, b : Int) : Unit {{ use q = Qubit[3]; {body} }} }}")
}

fn body_dump(p: &LoweredProgram) -> Vec<String> {
    p.entry_op().lines.iter().skip(1).map(|l| l.signature()).collect()
}

fn first_param(body: &str) -> GateParam {
    let p = lower(&entry(body)).unwrap();
    p.entry_op().lines[1].params[0].clone()
}

#[test]
fn sample_golden_dump() {
    let p = lower(&fixture("sample.qs")).unwrap();
    let main = p.entry_op();
    assert_eq!(main.name, "Entangle_test");
    let want = "enter Entangle_test
#0 [None] Alloc() ctrl=(;) tgt=(qs[0],qs[1],qs[2],qs[3])
#1 [None] H() ctrl=(;) tgt=qs[0]
#2 [None] X() ctrl=(;) tgt=qs[1]
#3 [None] H() ctrl=(;) tgt=qs[3]
#4 [Controlled] R1(π/2) ctrl=(;qs[0]) tgt=qs[2]
#5 [Controlled] X() ctrl=(;qs[0]) tgt=qs[2]
#6 [None] GHZ() ctrl=(a==1;) tgt=(qs[0],qs[1],qs[2])
#7 [Controlled] R1(π/4) ctrl=(a==1;qs[1]) tgt=qs[3]
#8 [Controlled] X() ctrl=(;qs[1]) tgt=qs[0]
#9 [Controlled] R1(-π/4) ctrl=(a==1;qs[1]) tgt=qs[3]
#10 [Controlled] X() ctrl=(a==1;qs[1]) tgt=qs[0]
#11 [None] H() ctrl=(;) tgt=qs[3]
exit Entangle_test
";
    assert_eq!(main.dump(), want);
    assert!(main.lines[6].callee().is_some());
}

#[test]
fn ghz_lowering() {
    let p = lower(&fixture("sample.qs")).unwrap();
    let ghz = p.find("GHZ").unwrap();
    let sigs: Vec<String> = ghz.lines.iter().map(|l| l.signature()).collect();
    assert_eq!(
        sigs,
        [
            "[None] H() ctrl=(;) tgt=target[0]",
            "[Controlled] X() ctrl=(;target[0]) tgt=target[1]",
            "[Controlled] X() ctrl=(;target[1]) tgt=target[2]",
        ]
    );
    assert_eq!(ghz.formal_qubits(), [q("target", 0), q("target", 1), q("target", 2)]);
}

#[test]
fn empty_body() {
    let p = lower("namespace T { @EntryPoint() operation E() : Unit { } }").unwrap();
    assert_eq!(p.entry_op().dump(), "enter E\nexit E\n");
}

#[test]
fn conjugation() {
    let p = lower(&entry("within { H(q[0]); } apply { X(q[0]); }")).unwrap();
    assert_eq!(
        body_dump(&p),
        ["[None] H() ctrl=(;) tgt=q[0]", "[None] X() ctrl=(;) tgt=q[0]", "[Adjoint] H() ctrl=(;) tgt=q[0]"]
    );
}

#[test]
fn conjugation_with_empty_apply_is_an_involution() {
    let p = lower(&entry("within { H(q[0]); Controlled S([q[0]], q[1]); T(q[2]); } apply { }")).unwrap();
    let lines = &p.entry_op().lines[1..];
    assert_eq!(lines.len(), 6);
    for i in 0..3 {
        let (a, b) = (&lines[i], &lines[5 - i]);
        assert_eq!((&a.op, &a.targets, &a.control), (&b.op, &b.targets, &b.control));
        assert_eq!(a.functor.adjoint(), b.functor);
    }
}

#[test]
fn if_else_conjunction() {
    let p = lower(&entry("if a == 1 { H(q[0]); } else { X(q[1]); }")).unwrap();
    assert_eq!(body_dump(&p), ["[None] H() ctrl=(a==1;) tgt=q[0]", "[None] X() ctrl=(¬a==1;) tgt=q[1]"]);
}

#[test]
fn else_less_if() {
    let p = lower(&entry("if a==1 { H(q[0]); }")).unwrap();
    assert_eq!(body_dump(&p), ["[None] H() ctrl=(a==1;) tgt=q[0]"]);
}

#[test]
fn nested_conditions_conjoin() {
    let p = lower(&entry("if a == 1 { if b == 2 { H(q[0]); } }")).unwrap();
    let cond = &p.entry_op().lines[1].control.condition;
    assert_eq!(cond.atoms().count(), 2);
    // A branch that contradicts its guard is dead and emits nothing.
    let p = lower(&entry("if a == 1 { if not (a == 1) { H(q[0]); } } X(q[1]);")).unwrap();
    assert_eq!(body_dump(&p), ["[None] X() ctrl=(;) tgt=q[1]"]);
}

#[test]
fn equivalent_conditions_share_text() {
    let p = lower(&entry("if a==1 { H(q[0]); } if a == 1 { H(q[0]); } if 1 == a { H(q[0]); }")).unwrap();
    let conds: Vec<String> = p.entry_op().lines[1..].iter().map(|l| l.control.condition.to_string()).collect();
    assert_eq!(conds[0], conds[1]);
    assert_eq!(conds[0], conds[2]);
}

#[test]
fn for_unroll_copies_body() {
    let p = lower(&entry("for i in 0..2 { H(q[i]); Controlled X([q[i]], q[(i + 1) % 3]); }")).unwrap();
    let lines = &p.entry_op().lines[1..];
    assert_eq!(lines.len(), 6);
    for (k, pair) in lines.chunks(2).enumerate() {
        assert_eq!(pair[0].target(), &q("q", k));
        assert_eq!(pair[1].control.qcontrol, [q("q", k)]);
        assert_eq!(pair[1].target(), &q("q", (k + 1) % 3));
    }
}

#[test]
fn for_unroll_bound() {
    let opts = LowerOptions { max_unroll: 2, ..LowerOptions::default() };
    let err = lower_with(&entry("for i in 0..2 { H(q[i]); }"), &opts).unwrap_err();
    assert!(matches!(err, LowerError::UnrollBoundExceeded { bound: 2, .. }), "{err}");
    assert!(lower_with(&entry("for i in 0..1 { H(q[i]); }"), &opts).is_ok());
}

#[test]
fn repeat_unrolls_to_bound() {
    let opts = LowerOptions { max_unroll: 3, ..LowerOptions::default() };
    let p = lower_with(&entry("repeat { H(q[0]); } until a == 1 fixup { Z(q[0]); }"), &opts).unwrap();
    let lines = &p.entry_op().lines[1..];
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[0].control.condition.is_unconditional());
    for pair in lines[1..].chunks(2) {
        assert_eq!((pair[0].op.as_str(), pair[1].op.as_str()), ("Z", "H"));
        assert_eq!(pair[0].control.condition.to_string(), "¬a==1");
    }
}

#[test]
fn constant_folding() {
    let quarter = GateParam::pi_fraction(1, 4);
    assert_eq!(first_param("R1(PI()/4.0, q[0]);"), quarter);
    assert_eq!(first_param("R1(-(-PI()/4.0), q[0]);"), quarter);
    assert_eq!(first_param("R1(PI() * 0.25, q[0]);"), quarter);
    assert_eq!(first_param("R1(-PI()/4.0, q[0]);"), quarter.neg());
    assert!(first_param("R1(-PI()/4.0, q[0]);").is_negation_of(&quarter));
    assert_eq!(first_param("R1(0.0, q[0]);"), GateParam::int(0));
    assert_eq!(first_param("R1(PI()/2.0 - PI()/4.0, q[0]);"), quarter);
}

#[test]
fn division_by_zero() {
    let err = lower(&entry("R1(PI() / 0.0, q[0]);")).unwrap_err();
    assert!(matches!(err, LowerError::DivisionByZero { .. }), "{err}");
}

#[test]
fn functors_compose() {
    let p = lower(&entry(
        "Adjoint Adjoint T(q[0]); Adjoint Controlled T([q[1]], q[0]); Controlled Adjoint S([q[1]], q[0]);",
    ))
    .unwrap();
    let f: Vec<Functor> = p.entry_op().lines[1..].iter().map(|l| l.functor).collect();
    assert_eq!(f, [Functor::None, Functor::AdjointControlled, Functor::AdjointControlled]);
    assert_eq!(Functor::Adjoint.compose(Functor::Adjoint), Functor::None);
    assert_eq!(Functor::Controlled.compose(Functor::Adjoint), Functor::AdjointControlled);
    assert_eq!(Functor::Adjoint.compose(Functor::Controlled), Functor::Controlled.compose(Functor::Adjoint));
}

#[test]
fn lowering_is_deterministic() {
    let src = fixture("sample.qs");
    assert_eq!(lower(&src).unwrap(), lower(&src).unwrap());
}

#[test]
fn ids_are_sequential_and_qubits_local() {
    let p = lower(&fixture("sample.qs")).unwrap();
    for op in &p.ops {
        let mut scope: Vec<QubitRef> = op.formal_qubits();
        scope.extend(op.locals());
        for (i, l) in op.lines.iter().enumerate() {
            assert_eq!(l.id, i);
            assert!(!l.control.qcontrol.contains(l.target()) || l.is_alloc());
            assert!(l.qubits().all(|x| scope.contains(x)), "{l}");
        }
    }
}

#[test]
fn adjoint_wrap_reverses_ghz() {
    let p = lower(&fixture("sample.qs")).unwrap();
    let ghz = p.find("GHZ").unwrap();
    let body: Vec<LabeledLine> = ghz.lines.iter().map(LabeledLine::top).collect();
    let mut call = p.entry_op().lines[6].clone();
    call.functor = Functor::Adjoint;
    call.control.condition = jiuchan::normalize::Condition::always();
    let wrapped = wrap_lines(&body, &ghz.formal_qubits(), &call, "L6").unwrap();
    let sigs: Vec<String> = wrapped.iter().map(|l| l.line.signature()).collect();
    assert_eq!(
        sigs,
        [
            "[AdjointControlled] X() ctrl=(;qs[1]) tgt=qs[2]",
            "[AdjointControlled] X() ctrl=(;qs[0]) tgt=qs[1]",
            "[Adjoint] H() ctrl=(;) tgt=qs[0]",
        ]
    );
    assert_eq!(wrapped.iter().map(|l| l.label.as_str()).collect::<Vec<_>>(), ["L6.2", "L6.1", "L6.0"]);
}

#[test]
fn conditioned_call_wraps_condition() {
    let p = lower(&fixture("sample.qs")).unwrap();
    let flat = flatten_program(&p).unwrap();
    let ghz_lines: Vec<&LabeledLine> = flat.iter().filter(|l| l.label.starts_with("L6.")).collect();
    assert_eq!(ghz_lines.len(), 3);
    for l in ghz_lines {
        assert_eq!(l.line.control.condition.to_string(), "a==1");
    }
    // The identity wrap leaves lines untouched apart from renaming.
    let ghz = p.find("GHZ").unwrap();
    let body: Vec<LabeledLine> = ghz.lines.iter().map(LabeledLine::top).collect();
    let mut call = p.entry_op().lines[6].clone();
    call.control.condition = jiuchan::normalize::Condition::always();
    let wrapped = wrap_lines(&body, &ghz.formal_qubits(), &call, "L6").unwrap();
    for (w, b) in wrapped.iter().zip(&ghz.lines) {
        assert_eq!((w.line.functor, &w.line.op, &w.line.control.condition), (b.functor, &b.op, &b.control.condition));
    }
}

#[test]
fn alias_conflict_is_rejected() {
    let src = "namespace T { operation P(x : Qubit, y : Qubit) : Unit { CNOT(x, y); } \
               @EntryPoint() operation M() : Unit { use q = Qubit[2]; P(q[0], q[0]); } }";
    let err = lower(src).unwrap_err();
    assert!(matches!(err, LowerError::AliasConflict { .. }), "{err}");
}
