//! Lexing, parsing and name resolution for the supported Q# subset.

pub mod ast;
pub mod diag;
pub mod lexer;
pub mod parser;
pub mod print;
pub mod resolve;

pub use ast::{OperationDecl, SourceProgram};
pub use diag::{Diagnostic, Diagnostics, ErrorKind, Severity, Span};
pub use parser::{parse_program, parse_str, Parsed};
pub use resolve::{resolve_references, resolve_with_library, ResolvedProgram};
