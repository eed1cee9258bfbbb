//! Checks, transition rules and the per-line transfer functions.

use std::collections::{BTreeMap, BTreeSet};

use super::gates::{GateLibrary, GateSpec, InverseKind};
use super::state::*;
use super::AnalysisError;
use crate::normalize::{OperationLine, QubitRef, Truth};

/// Treatment of an uncontrolled flip (X, Y) on a classical qubit whose
/// condition is unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlipMode {
    /// The qubit may or may not flip, so it becomes Q.
    #[default]
    Sound,
    /// Zero becomes One and One stays One, with a warning. Can miss
    /// entanglement; kept for comparison.
    Verbatim,
}

#[derive(Debug, Clone)]
pub struct StepContext<'a> {
    pub library: &'a GateLibrary,
    pub assumptions: &'a BTreeMap<String, bool>,
    pub flip_mode: FlipMode,
}

/// What a line did to the stacks.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum StackEffect {
    /// Not executed: false condition or a Zero control.
    Skipped,
    /// Executed without observable effect.
    NoOp,
    Alloc,
    /// Classical target flipped between Zero and One.
    Flip,
    /// Target stays classical under an unknown condition (verbatim mode).
    Held,
    /// Pushed onto the target (and its Q controls); `q_controls` get edges.
    Pushed {
        q_controls: Vec<QubitRef>,
    },
    /// Phase kickback recorded on the Q controls only.
    Kickback {
        q_controls: Vec<QubitRef>,
    },
    /// Cancelled `entry`. Removing it can bring further inverse pairs
    /// together; those are cancelled too and listed in `cascade`.
    Cancelled {
        entry: OpEntry,
        owners: Vec<QubitRef>,
        cascade: Vec<OpEntry>,
    },
}

impl StackEffect {
    pub fn is_effectful(&self) -> bool {
        !matches!(self, StackEffect::Skipped | StackEffect::NoOp)
    }
}

fn spec<'a>(lib: &'a GateLibrary, line: &OperationLine) -> Result<&'a GateSpec, AnalysisError> {
    lib.get(&line.op).ok_or_else(|| AnalysisError::UnknownGate(line.op.clone()))
}

pub fn is_magnitude(lib: &GateLibrary, op: &str) -> Result<bool, AnalysisError> {
    lib.is_magnitude(op).map_err(|_| AnalysisError::UnknownGate(op.to_string()))
}

/// False when the condition is false under the assumptions or
/// contradictory, or when some control qubit is Zero.
pub fn check_executed(line: &OperationLine, st: &AnalysisState, assumptions: &BTreeMap<String, bool>) -> bool {
    if line.control.condition.eval(assumptions) == Truth::False {
        return false;
    }
    line.control.qcontrol.iter().all(|c| st.state(c) != QubitState::Zero)
}

/// True for library gates and allocation; false routes to a summary.
pub fn check_fundamental(line: &OperationLine, lib: &GateLibrary) -> bool {
    line.callee().is_none() && lib.contains(&line.op)
}

pub fn check_inverse(entry: &OpEntry, line: &OperationLine, lib: &GateLibrary) -> bool {
    let a = &entry.line;
    if !a.is_gate() || !line.is_gate() || a.op != line.op || a.targets != line.targets {
        return false;
    }
    let Some(spec) = lib.get(&line.op) else {
        return false;
    };
    if a.params.len() != line.params.len() {
        return false;
    }
    match spec.inverse {
        InverseKind::SelfInverse => a.params == line.params,
        InverseKind::Adjoint => a.functor.is_adjoint() != line.functor.is_adjoint() && a.params == line.params,
        InverseKind::Negate => {
            let norm = |l: &OperationLine| -> Vec<crate::normalize::GateParam> {
                l.params.iter().map(|p| if l.functor.is_adjoint() { p.neg() } else { p.clone() }).collect()
            };
            norm(a).iter().zip(norm(line)).all(|(x, y)| y.is_negation_of(x))
        }
    }
}

pub fn check_controlled(entry: &OpEntry, line: &OperationLine, st: &AnalysisState) -> bool {
    let a: BTreeSet<&QubitRef> = entry.line.control.qcontrol.iter().collect();
    let b: BTreeSet<&QubitRef> = line.control.qcontrol.iter().collect();
    a == b
        && entry.line.control.condition == line.control.condition
        && line.control.qcontrol.iter().all(|c| entry.control_versions.get(c) == Some(&st.version(c)))
}

/// Target state after the line, without changing `st`.
pub fn transition_state(
    line: &OperationLine,
    st: &AnalysisState,
    ctx: &StepContext<'_>,
) -> Result<QubitState, AnalysisError> {
    let mut probe = st.clone();
    let mut warnings = Vec::new();
    step(&mut probe, "probe", line, ctx, &mut warnings)?;
    Ok(probe.state(line.target()))
}

fn entry_for(label: &str, line: &OperationLine, st: &AnalysisState, role: Role, prev: u64) -> OpEntry {
    OpEntry {
        label: label.to_string(),
        line: line.clone(),
        role,
        control_versions: line.control.qcontrol.iter().map(|c| (c.clone(), st.version(c))).collect(),
        prev_version: prev,
        target_state: None,
    }
}

fn push(st: &mut AnalysisState, q: &QubitRef, e: StackEntry) {
    st.stacks.entry(q.clone()).or_default().push(e);
}

fn remove_label(st: &mut AnalysisState, q: &QubitRef, label: &str) {
    if let Some(s) = st.stacks.get_mut(q) {
        if let Some(i) = s.iter().rposition(|e| matches!(e, StackEntry::Op(x) if x.label == label)) {
            s.remove(i);
        }
    }
}

/// The line with its Adjoint functor folded away where the library allows:
/// self-inverse gates drop it and angle gates negate their angles instead.
pub fn canonical_line(line: &OperationLine, spec: &GateSpec) -> OperationLine {
    let mut out = line.clone();
    if !line.functor.is_adjoint() {
        return out;
    }
    match spec.inverse {
        InverseKind::SelfInverse => out.functor = line.functor.adjoint(),
        InverseKind::Negate => {
            out.functor = line.functor.adjoint();
            out.params = line.params.iter().map(|p| p.neg()).collect();
        }
        InverseKind::Adjoint => {}
    }
    out
}

/// Stack transfer: `Stack_out = (Stack_in − Kill_S) ∪ Gen_S`, together with
/// the state transition of the target.
pub fn transfer_stack(
    st: &mut AnalysisState,
    label: &str,
    line: &OperationLine,
    ctx: &StepContext<'_>,
    warnings: &mut Vec<String>,
) -> Result<StackEffect, AnalysisError> {
    if line.is_alloc() {
        if line.control.condition.eval(ctx.assumptions) == Truth::False {
            return Ok(StackEffect::Skipped);
        }
        for q in &line.targets {
            st.states.insert(q.clone(), QubitState::Zero);
            st.stacks.remove(q);
            st.graph.remove_node(q);
        }
        return Ok(StackEffect::Alloc);
    }
    if !check_executed(line, st, ctx.assumptions) {
        return Ok(StackEffect::Skipped);
    }
    let spec = spec(ctx.library, line)?;
    let canon = canonical_line(line, spec);
    let line = &canon;
    let t = line.target().clone();
    let q_controls: Vec<QubitRef> =
        line.control.qcontrol.iter().filter(|c| st.state(c) == QubitState::Q).cloned().collect();
    let s = st.state(&t);

    if s == QubitState::Q {
        if let Some(StackEntry::Op(top)) = st.stack(&t).last() {
            if top.role == Role::Target && check_inverse(top, line, ctx.library) && check_controlled(top, line, st) {
                let entry = top.clone();
                st.stacks.get_mut(&t).expect("stack").pop();
                let mut owners = vec![t.clone()];
                for c in &entry.line.control.qcontrol {
                    remove_label(st, c, &entry.label);
                    owners.push(c.clone());
                }
                st.versions.insert(t.clone(), entry.prev_version);
                let cascade = cascade(st, ctx.library, &mut owners);
                return Ok(StackEffect::Cancelled { entry, owners, cascade });
            }
        }
        let prev = st.version(&t);
        let e = entry_for(label, line, st, Role::Target, prev);
        if spec.magnitude {
            let v = st.fresh_version();
            st.versions.insert(t.clone(), v);
        }
        push_everywhere(st, &t, e, &q_controls);
        return Ok(StackEffect::Pushed { q_controls });
    }

    if !spec.magnitude {
        if s == QubitState::Zero && !spec.phase_on_zero {
            return Ok(StackEffect::NoOp);
        }
        if q_controls.is_empty() {
            // A global phase.
            return Ok(StackEffect::NoOp);
        }
        let tops: Vec<Option<&OpEntry>> =
            q_controls.iter().map(|c| st.stack(c).last().and_then(StackEntry::as_op)).collect();
        if let Some(Some(first)) = tops.first() {
            let same = tops.iter().all(|x| matches!(x, Some(e) if e.label == first.label && e.role == Role::Kickback));
            if same
                && first.target_state == Some(s)
                && check_inverse(first, line, ctx.library)
                && check_controlled(first, line, st)
            {
                let entry = (*first).clone();
                for c in &q_controls {
                    st.stacks.get_mut(c).expect("stack").pop();
                }
                let mut owners = q_controls;
                let cascade = cascade(st, ctx.library, &mut owners);
                return Ok(StackEffect::Cancelled { entry, owners, cascade });
            }
        }
        let mut e = entry_for(label, line, st, Role::Kickback, 0);
        e.target_state = Some(s);
        for c in &q_controls {
            push(st, c, StackEntry::Op(e.clone()));
        }
        return Ok(StackEffect::Kickback { q_controls });
    }

    if q_controls.is_empty() && !spec.flip {
        become_q(st, &t, s, label, line, &q_controls);
        return Ok(StackEffect::Pushed { q_controls });
    }
    if !q_controls.is_empty() {
        become_q(st, &t, s, label, line, &q_controls);
        return Ok(StackEffect::Pushed { q_controls });
    }
    match line.control.condition.eval(ctx.assumptions) {
        Truth::True => {
            st.states.insert(t, s.flipped());
            Ok(StackEffect::Flip)
        }
        Truth::Unknown => match ctx.flip_mode {
            FlipMode::Sound => {
                become_q(st, &t, s, label, line, &q_controls);
                Ok(StackEffect::Pushed { q_controls })
            }
            FlipMode::Verbatim => {
                warnings.push(format!(
                    "{label}: `{}` on {t} under unknown condition {}; state kept classical",
                    line.op, line.control.condition
                ));
                if s == QubitState::Zero {
                    st.states.insert(t, QubitState::One);
                    Ok(StackEffect::Flip)
                } else {
                    Ok(StackEffect::Held)
                }
            }
        },
        Truth::False => Ok(StackEffect::Skipped),
    }
}

fn cancellable_pair(lower: &OpEntry, upper: &OpEntry, lib: &GateLibrary) -> bool {
    let a: BTreeSet<&QubitRef> = lower.line.control.qcontrol.iter().collect();
    let b: BTreeSet<&QubitRef> = upper.line.control.qcontrol.iter().collect();
    lower.role == Role::Target
        && upper.role == Role::Target
        && a == b
        && lower.line.control.condition == upper.line.control.condition
        && lower.control_versions == upper.control_versions
        && check_inverse(lower, &upper.line, lib)
}

/// Cancel inverse pairs that a removal left adjacent on a stack. Both
/// entries must target the stack's owner under the same condition and the
/// same control magnitudes, exactly as a direct cancellation would demand.
/// Returns the removed entries and adds every touched qubit to `owners`.
fn cascade(st: &mut AnalysisState, lib: &GateLibrary, owners: &mut Vec<QubitRef>) -> Vec<OpEntry> {
    let mut removed = Vec::new();
    let mut work = owners.clone();
    while let Some(q) = work.pop() {
        let s = st.stack(&q);
        let Some(i) = (1..s.len()).find(|&i| match (&s[i - 1], &s[i]) {
            (StackEntry::Op(lower), StackEntry::Op(upper)) => cancellable_pair(lower, upper, lib),
            _ => false,
        }) else {
            continue;
        };
        let at_top = i + 1 == s.len();
        let stack = st.stacks.get_mut(&q).expect("stack");
        let upper = stack.remove(i);
        let lower = stack.remove(i - 1);
        let (StackEntry::Op(lower), StackEntry::Op(upper)) = (lower, upper) else {
            unreachable!("pair checked above");
        };
        for c in &lower.line.control.qcontrol {
            remove_label(st, c, &lower.label);
            remove_label(st, c, &upper.label);
            work.push(c.clone());
            owners.push(c.clone());
        }
        if at_top {
            st.versions.insert(q.clone(), lower.prev_version);
        }
        work.push(q.clone());
        owners.push(q);
        removed.push(lower);
        removed.push(upper);
    }
    owners.sort();
    owners.dedup();
    removed
}

fn become_q(
    st: &mut AnalysisState,
    t: &QubitRef,
    origin: QubitState,
    label: &str,
    line: &OperationLine,
    q_controls: &[QubitRef],
) {
    let prev = st.version(t);
    let e = entry_for(label, line, st, Role::Target, prev);
    let v = st.fresh_version();
    st.versions.insert(t.clone(), v);
    st.states.insert(t.clone(), QubitState::Q);
    st.stacks.insert(t.clone(), vec![StackEntry::Origin(origin)]);
    st.graph.add_node(t.clone());
    push_everywhere(st, t, e, q_controls);
}

fn push_everywhere(st: &mut AnalysisState, t: &QubitRef, e: OpEntry, q_controls: &[QubitRef]) {
    for c in q_controls {
        let mut ce = e.clone();
        ce.role = Role::Control;
        push(st, c, StackEntry::Op(ce));
    }
    push(st, t, StackEntry::Op(e));
}

/// Entangle transfer: `Entangle_out = (Entangle_in − Kill_E) ∪ Gen_E`, then
/// settle qubits whose stacks hold only their origin.
pub fn transfer_entangle(st: &mut AnalysisState, label: &str, line: &OperationLine, effect: &StackEffect) {
    match effect {
        StackEffect::Cancelled { entry, owners, cascade } => {
            st.graph.remove_label(&entry.label);
            for e in cascade {
                st.graph.remove_label(&e.label);
            }
            for q in owners {
                settle(st, q);
            }
        }
        StackEffect::Pushed { q_controls } => {
            let t = line.target();
            for c in q_controls {
                st.graph.add_edge(c, t, label);
            }
        }
        StackEffect::Kickback { q_controls } => {
            for i in 0..q_controls.len() {
                for j in i + 1..q_controls.len() {
                    st.graph.add_edge(&q_controls[i], &q_controls[j], label);
                }
            }
        }
        _ => {}
    }
}

/// Return a Q qubit to its origin state once only the origin is left.
pub fn settle(st: &mut AnalysisState, q: &QubitRef) {
    if st.state(q) != QubitState::Q {
        return;
    }
    if let [StackEntry::Origin(origin)] = st.stack(q) {
        let origin = *origin;
        st.states.insert(q.clone(), origin);
        st.stacks.remove(q);
        st.graph.remove_node(q);
    }
}

/// One gate or allocation line: stack transfer, then entangle transfer.
pub fn step(
    st: &mut AnalysisState,
    label: &str,
    line: &OperationLine,
    ctx: &StepContext<'_>,
    warnings: &mut Vec<String>,
) -> Result<StackEffect, AnalysisError> {
    let effect = transfer_stack(st, label, line, ctx, warnings)?;
    transfer_entangle(st, label, line, &effect);
    Ok(effect)
}
