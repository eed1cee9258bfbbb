//! Ground truth for the analysis: a dense simulator, a purity-based
//! separability test and an exhaustive checker over condition assignments.

pub mod purity;
pub mod sim;
pub mod verify;

use thiserror::Error;

pub use purity::{is_separable_partition, reduced_purity, SEPARABLE_TOLERANCE};
pub use sim::{gate_matrix, line_matrix, program_qubits, simulate, StateVector, MAX_QUBITS};
pub use verify::{verify_analysis, verify_components, VerifyReport, Violation, MAX_ATOMS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("{0} qubits exceed the simulator limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("qubit `{0}` is not part of the simulated register")]
    UnknownQubit(String),
    #[error("condition `{0}` is undecided under the assignment")]
    UndecidedCondition(String),
    #[error("symbolic gate parameter `{0}`")]
    SymbolicParameter(String),
    #[error("partition side is empty")]
    EmptyPartition,
    #[error("{0} condition atoms exceed the limit of {MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error(transparent)]
    Bind(#[from] crate::normalize::BindError),
}
