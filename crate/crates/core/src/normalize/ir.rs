//! The operation-line IR.

use std::collections::BTreeSet;
use std::fmt;

use super::cond::Condition;
use super::param::GateParam;
use crate::analysis::gates::ALLOC;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Functor {
    #[default]
    None,
    Adjoint,
    Controlled,
    AdjointControlled,
}

impl Functor {
    pub fn from_parts(adjoint: bool, controlled: bool) -> Self {
        match (adjoint, controlled) {
            (false, false) => Functor::None,
            (true, false) => Functor::Adjoint,
            (false, true) => Functor::Controlled,
            (true, true) => Functor::AdjointControlled,
        }
    }

    pub fn is_adjoint(self) -> bool {
        matches!(self, Functor::Adjoint | Functor::AdjointControlled)
    }

    pub fn is_controlled(self) -> bool {
        matches!(self, Functor::Controlled | Functor::AdjointControlled)
    }

    pub fn adjoint(self) -> Self {
        Functor::from_parts(!self.is_adjoint(), self.is_controlled())
    }

    pub fn controlled(self) -> Self {
        Functor::from_parts(self.is_adjoint(), true)
    }

    /// Apply `outer` on top of `self`: adjoints cancel pairwise, controls absorb.
    pub fn compose(self, outer: Functor) -> Self {
        Functor::from_parts(self.is_adjoint() ^ outer.is_adjoint(), self.is_controlled() || outer.is_controlled())
    }
}

impl fmt::Display for Functor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Functor::None => "None",
            Functor::Adjoint => "Adjoint",
            Functor::Controlled => "Controlled",
            Functor::AdjointControlled => "AdjointControlled",
        })
    }
}

/// A single qubit: `base` or `base[index]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitRef {
    pub base: String,
    pub index: Option<usize>,
}

impl QubitRef {
    pub fn scalar(base: impl Into<String>) -> Self {
        Self { base: base.into(), index: None }
    }

    pub fn indexed(base: impl Into<String>, index: usize) -> Self {
        Self { base: base.into(), index: Some(index) }
    }

    pub fn with_base(&self, base: String) -> Self {
        Self { base, index: self.index }
    }
}

impl serde::Serialize for QubitRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]", self.base, i),
            None => f.write_str(&self.base),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControlSpec {
    pub condition: Condition,
    /// Ordered, duplicate-free.
    pub qcontrol: Vec<QubitRef>,
}

impl ControlSpec {
    pub fn qcontrol_set(&self) -> BTreeSet<&QubitRef> {
        self.qcontrol.iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Gate,
    Alloc,
    /// Call to a user operation instance (index into the lowered program).
    Call(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationLine {
    pub id: usize,
    pub functor: Functor,
    pub op: String,
    pub params: Vec<GateParam>,
    pub kind: LineKind,
    pub control: ControlSpec,
    /// Exactly one qubit for gates; allocations and calls may carry several.
    pub targets: Vec<QubitRef>,
    /// Source line of the statement this line came from.
    pub source_line: u32,
}

impl OperationLine {
    pub fn target(&self) -> &QubitRef {
        &self.targets[0]
    }

    pub fn is_gate(&self) -> bool {
        self.kind == LineKind::Gate
    }

    pub fn is_alloc(&self) -> bool {
        self.kind == LineKind::Alloc
    }

    pub fn callee(&self) -> Option<usize> {
        match self.kind {
            LineKind::Call(i) => Some(i),
            _ => None,
        }
    }

    pub fn alloc(id: usize, targets: Vec<QubitRef>, condition: Condition, source_line: u32) -> Self {
        Self {
            id,
            functor: Functor::None,
            op: ALLOC.to_string(),
            params: Vec::new(),
            kind: LineKind::Alloc,
            control: ControlSpec { condition, qcontrol: Vec::new() },
            targets,
            source_line,
        }
    }

    /// Every qubit the line mentions, controls first.
    pub fn qubits(&self) -> impl Iterator<Item = &QubitRef> {
        self.control.qcontrol.iter().chain(self.targets.iter())
    }

    /// Everything except the id.
    pub fn signature(&self) -> String {
        let s = self.to_string();
        match s.find(' ') {
            Some(i) => s[i + 1..].to_string(),
            None => s,
        }
    }
}

impl fmt::Display for OperationLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        let ctrls: Vec<String> = self.control.qcontrol.iter().map(|q| q.to_string()).collect();
        let tgt = if self.targets.len() == 1 {
            self.targets[0].to_string()
        } else {
            let t: Vec<String> = self.targets.iter().map(|q| q.to_string()).collect();
            format!("({})", t.join(","))
        };
        write!(
            f,
            "#{} [{}] {}({}) ctrl=({};{}) tgt={}",
            self.id,
            self.functor,
            self.op,
            params.join(","),
            self.control.condition,
            ctrls.join(","),
            tgt
        )
    }
}

/// Qubit parameter of a lowered operation and the refs it expands to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formal {
    pub name: String,
    pub qubits: Vec<QubitRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredOperation {
    /// Display name: the declaration name, or `name#k` when the declaration
    /// was instantiated more than once.
    pub name: String,
    pub decl: String,
    pub formals: Vec<Formal>,
    pub lines: Vec<OperationLine>,
}

impl LoweredOperation {
    /// Formal qubits flattened in parameter order.
    pub fn formal_qubits(&self) -> Vec<QubitRef> {
        self.formals.iter().flat_map(|f| f.qubits.iter().cloned()).collect()
    }

    /// Locally allocated qubits in allocation order.
    pub fn locals(&self) -> Vec<QubitRef> {
        self.lines.iter().filter(|l| l.is_alloc()).flat_map(|l| l.targets.iter().cloned()).collect()
    }

    /// Debug dump, one line per operation line between enter/exit markers.
    pub fn dump(&self) -> String {
        let mut out = format!("enter {}\n", self.name);
        for l in &self.lines {
            out.push_str(&l.to_string());
            out.push('\n');
        }
        out.push_str(&format!("exit {}\n", self.name));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredProgram {
    pub ops: Vec<LoweredOperation>,
    pub entry: usize,
}

impl LoweredProgram {
    pub fn entry_op(&self) -> &LoweredOperation {
        &self.ops[self.entry]
    }

    pub fn find(&self, name: &str) -> Option<&LoweredOperation> {
        self.ops.iter().find(|o| o.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functor_composition() {
        assert_eq!(Functor::Adjoint.compose(Functor::Adjoint), Functor::None);
        assert_eq!(Functor::Adjoint.compose(Functor::Controlled), Functor::AdjointControlled);
        assert_eq!(Functor::Controlled.compose(Functor::Adjoint), Functor::AdjointControlled);
        assert_eq!(Functor::AdjointControlled.adjoint(), Functor::Controlled);
        for a in [Functor::None, Functor::Adjoint, Functor::Controlled, Functor::AdjointControlled] {
            for b in [Functor::None, Functor::Adjoint, Functor::Controlled, Functor::AdjointControlled] {
                assert_eq!(a.compose(b), b.compose(a));
            }
        }
    }

    #[test]
    fn dump_format() {
        let l = OperationLine {
            id: 5,
            functor: Functor::Controlled,
            op: "X".into(),
            params: vec![],
            kind: LineKind::Gate,
            control: ControlSpec { condition: Condition::always(), qcontrol: vec![QubitRef::indexed("qs", 0)] },
            targets: vec![QubitRef::indexed("qs", 2)],
            source_line: 21,
        };
        assert_eq!(l.to_string(), "#5 [Controlled] X() ctrl=(;qs[0]) tgt=qs[2]");
        assert_eq!(l.signature(), "[Controlled] X() ctrl=(;qs[0]) tgt=qs[2]");
    }
}
