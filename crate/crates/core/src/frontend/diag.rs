use std::fmt;

use thiserror::Error;

/// Source position, 1-based. Positions never take part in structural
/// equality, so ASTs parsed from differently formatted text compare equal.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => f.write_str("warning"),
            Severity::Error => f.write_str("error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported statement: {0}")]
    UnsupportedStatement(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("unknown qubit `{0}`")]
    UnknownQubit(String),
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate declaration `{0}`")]
    DuplicateDeclaration(String),
    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),
    #[error("no operation is marked @EntryPoint()")]
    MissingEntryPoint,
    #[error("more than one entry point: {0}")]
    DuplicateEntryPoint(String),
    #[error("{0}")]
    Ignored(String),
}

impl ErrorKind {
    pub fn is_measurement(&self) -> bool {
        matches!(self, ErrorKind::UnsupportedStatement(k) if k.starts_with("measurement"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub kind: ErrorKind,
}

impl Diagnostic {
    pub fn error(span: Span, kind: ErrorKind) -> Self {
        Self { severity: Severity::Error, span, kind }
    }

    pub fn warning(span: Span, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, span, kind: ErrorKind::Ignored(message.into()) }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!("{}:{}:{}: {}: {}", file, self.span.line, self.span.col, self.severity, self.kind)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.span.line, self.span.col, self.severity, self.kind)
    }
}

/// A batch of diagnostics where at least one is an error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", render_all(.0))]
pub struct Diagnostics(pub Vec<Diagnostic>);

fn render_all(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

impl Diagnostics {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }

    pub fn has_kind(&self, pred: impl Fn(&ErrorKind) -> bool) -> bool {
        self.0.iter().any(|d| pred(&d.kind))
    }
}
