//! Lowering of resolved programs into straight-line operation lines.

pub mod cond;
pub mod inline;
pub mod ir;
pub mod lower;
pub mod param;

pub use cond::{CondAtom, Condition, Truth};
pub use inline::{bind_aliases, flatten_program, inline_operation, wrap_lines, BindError, LabeledLine};
pub use ir::{ControlSpec, Formal, Functor, LineKind, LoweredOperation, LoweredProgram, OperationLine, QubitRef};
pub use lower::{
    lower_operation, lower_program, lower_program_with_library, ClassicalValue, LowerError, LowerOptions,
    DEFAULT_MAX_UNROLL,
};
pub use param::GateParam;
