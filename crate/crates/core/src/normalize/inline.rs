//! Line wrapping at call sites and full inlining.
//!
//! Lines carry a path label: `L5` for line 5 of the analyzed operation,
//! `L6.2` for line 2 of the callee invoked at line 6, and so on. Callee
//! locals are renamed `L6:name` so distinct call sites never share qubits.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::ir::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledLine {
    pub label: String,
    pub line: OperationLine,
}

impl LabeledLine {
    pub fn top(line: &OperationLine) -> Self {
        Self { label: format!("L{}", line.id), line: line.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("`{op}` expects {expected} qubit(s), found {found}")]
    ArityMismatch { op: String, expected: usize, found: usize },
    #[error("qubit `{0}` bound to more than one formal")]
    AliasConflict(String),
}

/// Actual qubit for each formal, checked for arity and aliasing.
pub fn bind_aliases(formals: &[QubitRef], call: &OperationLine) -> Result<BTreeMap<QubitRef, QubitRef>, BindError> {
    if formals.len() != call.targets.len() {
        return Err(BindError::ArityMismatch {
            op: call.op.clone(),
            expected: formals.len(),
            found: call.targets.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for q in call.targets.iter().chain(&call.control.qcontrol) {
        if !seen.insert(q) {
            return Err(BindError::AliasConflict(q.to_string()));
        }
    }
    Ok(formals.iter().cloned().zip(call.targets.iter().cloned()).collect())
}

/// Adjust callee lines for one call site: rename qubits, apply the call's
/// functor and conjoin its control.
pub fn wrap_lines(
    lines: &[LabeledLine],
    formals: &[QubitRef],
    call: &OperationLine,
    site: &str,
) -> Result<Vec<LabeledLine>, BindError> {
    let alias = bind_aliases(formals, call)?;
    let rename = |q: &QubitRef| -> QubitRef {
        match alias.get(q) {
            Some(a) => a.clone(),
            None => q.with_base(format!("{site}:{}", q.base)),
        }
    };
    let relabel = |l: &str| format!("{site}.{}", l.trim_start_matches('L'));

    let renamed: Vec<LabeledLine> = lines
        .iter()
        .map(|l| {
            let mut line = l.line.clone();
            line.targets = line.targets.iter().map(rename).collect();
            line.control.qcontrol = line.control.qcontrol.iter().map(rename).collect();
            LabeledLine { label: relabel(&l.label), line }
        })
        .collect();

    let ordered: Vec<LabeledLine> = if call.functor.is_adjoint() {
        let (allocs, ops): (Vec<_>, Vec<_>) = renamed.into_iter().partition(|l| l.line.is_alloc());
        allocs
            .into_iter()
            .chain(ops.into_iter().rev().map(|mut l| {
                l.line.functor = l.line.functor.adjoint();
                l
            }))
            .collect()
    } else {
        renamed
    };

    Ok(ordered
        .into_iter()
        .map(|mut l| {
            if !l.line.is_alloc() && !call.control.qcontrol.is_empty() {
                let mut q = call.control.qcontrol.clone();
                q.extend(l.line.control.qcontrol.iter().cloned());
                l.line.control.qcontrol = q;
                l.line.functor = l.line.functor.controlled();
            }
            l.line.control.condition = call.control.condition.and(&l.line.control.condition);
            l
        })
        .collect())
}

/// The body of operation `op` with every call expanded recursively.
pub fn inline_operation(program: &LoweredProgram, op: usize) -> Result<Vec<LabeledLine>, BindError> {
    let mut memo = HashMap::new();
    inline_memo(program, op, &mut memo)
}

/// The entry operation fully inlined: only gate and allocation lines remain.
pub fn flatten_program(program: &LoweredProgram) -> Result<Vec<LabeledLine>, BindError> {
    inline_operation(program, program.entry)
}

fn inline_memo(
    program: &LoweredProgram,
    op: usize,
    memo: &mut HashMap<usize, Vec<LabeledLine>>,
) -> Result<Vec<LabeledLine>, BindError> {
    if let Some(v) = memo.get(&op) {
        return Ok(v.clone());
    }
    let mut out = Vec::new();
    for line in &program.ops[op].lines {
        match line.callee() {
            Some(c) => {
                let body = inline_memo(program, c, memo)?;
                let formals = program.ops[c].formal_qubits();
                out.extend(wrap_lines(&body, &formals, line, &format!("L{}", line.id))?);
            }
            None => out.push(LabeledLine::top(line)),
        }
    }
    memo.insert(op, out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_str;
    use crate::frontend::resolve::resolve_references;
    use crate::normalize::lower::{lower_program, LowerOptions};

    fn program(src: &str) -> LoweredProgram {
        let r = resolve_references(parse_str(src).unwrap().namespace, None).unwrap();
        lower_program(&r, &LowerOptions::default()).unwrap()
    }

    const SRC: &str = "namespace N {
        operation G(t : Qubit[]) : Unit is Adj + Ctl { use anc = Qubit(); H(t[0]); CNOT(t[0], t[1]); T(anc); }
        @EntryPoint() operation Main(a : Int) : Unit {
            use qs = Qubit[3];
            G(qs[0..1]);
            if a == 1 { Adjoint G([qs[1], qs[2]]); }
            Controlled G([qs[2]], [qs[0], qs[1]]);
        }
    }";

    #[test]
    fn inlining_renames_and_wraps() {
        let p = program(SRC);
        let flat = flatten_program(&p).unwrap();
        let got: Vec<String> = flat.iter().map(|l| format!("{} {}", l.label, l.line.signature())).collect();
        assert_eq!(
            got,
            [
                "L0 [None] Alloc() ctrl=(;) tgt=(qs[0],qs[1],qs[2])",
                "L1.0 [None] Alloc() ctrl=(;) tgt=L1:anc",
                "L1.1 [None] H() ctrl=(;) tgt=qs[0]",
                "L1.2 [Controlled] X() ctrl=(;qs[0]) tgt=qs[1]",
                "L1.3 [None] T() ctrl=(;) tgt=L1:anc",
                "L2.0 [None] Alloc() ctrl=(a==1;) tgt=L2:anc",
                "L2.3 [Adjoint] T() ctrl=(a==1;) tgt=L2:anc",
                "L2.2 [AdjointControlled] X() ctrl=(a==1;qs[1]) tgt=qs[2]",
                "L2.1 [Adjoint] H() ctrl=(a==1;) tgt=qs[1]",
                "L3.0 [None] Alloc() ctrl=(;) tgt=L3:anc",
                "L3.1 [Controlled] H() ctrl=(;qs[2]) tgt=qs[0]",
                "L3.2 [Controlled] X() ctrl=(;qs[2],qs[0]) tgt=qs[1]",
                "L3.3 [Controlled] T() ctrl=(;qs[2]) tgt=L3:anc",
            ]
        );
    }

    #[test]
    fn alias_checks() {
        let p = program(SRC);
        let mut call = p.entry_op().lines[1].clone();
        let formals = p.ops[1].formal_qubits();
        call.targets.pop();
        assert!(matches!(bind_aliases(&formals, &call), Err(BindError::ArityMismatch { .. })));
        call.targets.push(call.targets[0].clone());
        assert!(matches!(bind_aliases(&formals, &call), Err(BindError::AliasConflict(_))));
    }
}
