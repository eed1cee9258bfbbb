//! Operation summaries and their application at call sites.

use super::driver::{analyze_operation, AnalysisConfig, Summaries};
use super::state::{AnalysisState, StackEntry};
use super::transfer::{step, StackEffect, StepContext};
use super::AnalysisError;
use crate::normalize::{wrap_lines, LabeledLine, LoweredProgram, OperationLine, QubitRef};

/// A callee analyzed with every formal in Q and a boundary-marked stack.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationSummary {
    pub name: String,
    pub formals: Vec<QubitRef>,
    pub exit: AnalysisState,
    /// Executed lines that had an effect, minus cancelled pairs, in order.
    /// Replaying it at a call site reproduces the callee's effect.
    pub trace: Vec<LabeledLine>,
    /// True when any surviving line is a magnitude gate.
    pub magnitude: bool,
    pub warnings: Vec<String>,
}

impl OperationSummary {
    /// Formal stacks as labels with the boundary marker dropped.
    pub fn formal_stacks(&self) -> Vec<(QubitRef, Vec<String>)> {
        self.formals
            .iter()
            .map(|f| {
                let labels = self
                    .exit
                    .stack(f)
                    .iter()
                    .filter(|e| !matches!(e, StackEntry::Boundary))
                    .map(StackEntry::label)
                    .collect();
                (f.clone(), labels)
            })
            .collect()
    }
}

pub fn summarize_operation(
    program: &LoweredProgram,
    op: usize,
    summaries: &Summaries,
    cfg: &AnalysisConfig,
) -> Result<OperationSummary, AnalysisError> {
    let lowered = &program.ops[op];
    let formals = lowered.formal_qubits();
    let result = analyze_operation(program, op, AnalysisState::all_q(&formals), summaries, cfg)?;
    let mut magnitude = false;
    for l in &result.trace {
        if l.line.is_gate() && cfg.library.is_magnitude(&l.line.op).unwrap_or(true) {
            magnitude = true;
        }
    }
    Ok(OperationSummary {
        name: lowered.name.clone(),
        formals,
        exit: result.exit,
        trace: result.trace,
        magnitude,
        warnings: result.warnings,
    })
}

/// The summary's trace adjusted for one call site: qubits renamed, functor
/// applied and the call's control conjoined.
pub fn wrap_summary(
    summary: &OperationSummary,
    call: &OperationLine,
    site: &str,
) -> Result<Vec<LabeledLine>, AnalysisError> {
    Ok(wrap_lines(&summary.trace, &summary.formals, call, site)?)
}

/// Merge a summary into the caller's state by replaying its wrapped trace,
/// so every line meets the caller's stack tops exactly as inlined code would.
pub fn apply_summary(
    call: &OperationLine,
    site: &str,
    summary: &OperationSummary,
    st: &mut AnalysisState,
    ctx: &StepContext<'_>,
    warnings: &mut Vec<String>,
) -> Result<Vec<(LabeledLine, StackEffect)>, AnalysisError> {
    let wrapped = wrap_summary(summary, call, site)?;
    let mut out = Vec::with_capacity(wrapped.len());
    for l in wrapped {
        let eff = step(st, &l.label, &l.line, ctx, warnings)?;
        out.push((l, eff));
    }
    Ok(out)
}
