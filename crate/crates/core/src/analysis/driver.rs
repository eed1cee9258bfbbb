//! Intraprocedural walk and the whole-program driver.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::gates::GateLibrary;
use super::state::AnalysisState;
use super::summary::{apply_summary, summarize_operation, OperationSummary};
use super::transfer::{step, FlipMode, StackEffect, StepContext};
use super::AnalysisError;
use crate::graphs::build_call_graph;
use crate::normalize::{LabeledLine, LoweredProgram};

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    /// Fixed truth values for condition atoms, keyed by canonical text.
    pub assumptions: BTreeMap<String, bool>,
    pub flip_mode: FlipMode,
    pub library: GateLibrary,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { assumptions: BTreeMap::new(), flip_mode: FlipMode::Sound, library: GateLibrary::builtin().clone() }
    }
}

impl AnalysisConfig {
    fn step_context(&self) -> StepContext<'_> {
        StepContext { library: &self.library, assumptions: &self.assumptions, flip_mode: self.flip_mode }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramPoint {
    Before(usize),
    After(usize),
}

impl fmt::Display for ProgramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramPoint::Before(i) => write!(f, "before L{i}"),
            ProgramPoint::After(i) => write!(f, "after L{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub point: ProgramPoint,
    pub state: AnalysisState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub op: String,
    pub exit: AnalysisState,
    /// Before and after every line of the operation.
    pub snapshots: Vec<Snapshot>,
    pub warnings: Vec<String>,
    /// Executed lines that had an effect, minus cancelled pairs.
    pub trace: Vec<LabeledLine>,
}

impl AnalysisResult {
    pub fn at(&self, point: ProgramPoint) -> Option<&AnalysisState> {
        self.snapshots.iter().find(|s| s.point == point).map(|s| &s.state)
    }
}

/// Summaries keyed by operation index.
pub type Summaries = BTreeMap<usize, OperationSummary>;

struct TraceBuilder {
    lines: Vec<Option<LabeledLine>>,
    pos: HashMap<String, usize>,
}

impl TraceBuilder {
    fn record(&mut self, line: LabeledLine, effect: &StackEffect) {
        match effect {
            StackEffect::Cancelled { entry, cascade, .. } => {
                for e in std::iter::once(entry).chain(cascade) {
                    if let Some(i) = self.pos.remove(&e.label) {
                        self.lines[i] = None;
                    }
                }
            }
            e if e.is_effectful() => {
                self.pos.insert(line.label.clone(), self.lines.len());
                self.lines.push(Some(line));
            }
            _ => {}
        }
    }
}

/// Walk one operation's lines from `entry`, snapshotting every point.
pub fn analyze_operation(
    program: &LoweredProgram,
    op: usize,
    entry: AnalysisState,
    summaries: &Summaries,
    cfg: &AnalysisConfig,
) -> Result<AnalysisResult, AnalysisError> {
    let lowered = &program.ops[op];
    let ctx = cfg.step_context();
    let mut st = entry;
    let mut warnings = Vec::new();
    let mut snapshots = Vec::with_capacity(lowered.lines.len() * 2);
    let mut trace = TraceBuilder { lines: Vec::new(), pos: HashMap::new() };
    for line in &lowered.lines {
        snapshots.push(Snapshot { point: ProgramPoint::Before(line.id), state: st.clone() });
        let label = format!("L{}", line.id);
        match line.callee() {
            Some(c) => {
                let summary = summaries.get(&c).ok_or_else(|| AnalysisError::MissingSummary(line.op.clone()))?;
                for (l, eff) in apply_summary(line, &label, summary, &mut st, &ctx, &mut warnings)? {
                    trace.record(l, &eff);
                }
            }
            None => {
                let eff = step(&mut st, &label, line, &ctx, &mut warnings)?;
                trace.record(LabeledLine { label, line: line.clone() }, &eff);
            }
        }
        snapshots.push(Snapshot { point: ProgramPoint::After(line.id), state: st.clone() });
    }
    Ok(AnalysisResult {
        op: lowered.name.clone(),
        exit: st,
        snapshots,
        warnings,
        trace: trace.lines.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone)]
pub struct ProgramAnalysis {
    pub summaries: Summaries,
    pub result: AnalysisResult,
}

impl ProgramAnalysis {
    pub fn summary(&self, program: &LoweredProgram, name: &str) -> Option<&OperationSummary> {
        self.summaries.get(&program.index_of(name)?)
    }
}

/// Summarize callees bottom-up, then analyze the entry from an empty state.
pub fn analyze_program(program: &LoweredProgram, cfg: &AnalysisConfig) -> Result<ProgramAnalysis, AnalysisError> {
    let cg = build_call_graph(program)?;
    let mut summaries = Summaries::new();
    for name in cg.summary_order()? {
        let idx = program.index_of(&name).expect("call graph node is an operation");
        if idx != program.entry {
            let s = summarize_operation(program, idx, &summaries, cfg)?;
            summaries.insert(idx, s);
        }
    }
    let result = analyze_operation(program, program.entry, AnalysisState::new(), &summaries, cfg)?;
    Ok(ProgramAnalysis { summaries, result })
}
