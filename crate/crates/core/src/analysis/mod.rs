//! The dataflow engine: abstract states, operation stacks, entanglement
//! graphs, and intra- and interprocedural drivers.

pub mod driver;
pub mod gates;
pub mod state;
pub mod summary;
pub mod transfer;

use thiserror::Error;

pub use driver::{
    analyze_operation, analyze_program, AnalysisConfig, AnalysisResult, ProgramAnalysis, ProgramPoint, Snapshot,
    Summaries,
};
pub use gates::{GateLibrary, GateSpec, InverseKind};
pub use state::{AnalysisState, Edge, EntanglementGraph, OpEntry, QubitState, Role, StackEntry};
pub use summary::{apply_summary, summarize_operation, wrap_summary, OperationSummary};
pub use transfer::{
    check_controlled, check_executed, check_fundamental, check_inverse, is_magnitude, settle, step, transfer_entangle,
    transfer_stack, transition_state, FlipMode, StackEffect, StepContext,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("no summary for `{0}`")]
    MissingSummary(String),
    #[error(transparent)]
    Bind(#[from] crate::normalize::BindError),
    #[error(transparent)]
    Graph(#[from] crate::graphs::GraphError),
}
