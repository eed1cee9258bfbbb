use std::path::PathBuf;

use super::diag::Span;

#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub path: PathBuf,
    pub text: String,
}

impl SourceProgram {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        Self { path: path.into(), text: text.into() }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> std::io::Result<Self> {
        let path = path.into();
        let text = std::fs::read_to_string(&path)?;
        Ok(Self { path, text })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Namespace {
    pub name: String,
    pub opens: Vec<String>,
    pub decls: Vec<OperationDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Qubit,
    /// Length is only known per call site.
    QubitArray(Option<usize>),
    Int,
    Double,
    Bool,
}

impl ParamKind {
    pub fn is_quantum(self) -> bool {
        matches!(self, ParamKind::Qubit | ParamKind::QubitArray(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Characteristics {
    pub adj: bool,
    pub ctl: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub characteristics: Characteristics,
    pub body: Vec<Stmt>,
    pub is_entry: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctorKw {
    Adjoint,
    Controlled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallExpr {
    /// Outermost first, as written.
    pub functors: Vec<FunctorKw>,
    pub callee: String,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Call(CallExpr),
    /// `use name = Qubit()` (size `None`) or `use name = Qubit[size]`.
    QubitAlloc {
        name: String,
        size: Option<Expr>,
    },
    /// Classical or qubit-alias binding; lowers to nothing.
    Let {
        name: String,
        value: Expr,
    },
    For {
        var: String,
        iterable: Expr,
        body: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    Conjugation {
        within: Vec<Stmt>,
        apply: Vec<Stmt>,
    },
    Repeat {
        body: Vec<Stmt>,
        until: Expr,
        fixup: Option<Vec<Stmt>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Double(String),
    Bool(bool),
    Str(String),
    Ident(String),
    Call { callee: String, args: Vec<Expr> },
    Index { base: Box<Expr>, index: Box<Expr> },
    Array(Vec<Expr>),
    Tuple(Vec<Expr>),
    Range { start: Box<Expr>, step: Option<Box<Expr>>, end: Box<Expr> },
    Unary { op: UnOp, expr: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    /// Visit this expression and every sub-expression, outermost first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Call { args, .. } | ExprKind::Array(args) | ExprKind::Tuple(args) => {
                args.iter().for_each(|a| a.walk(f))
            }
            ExprKind::Index { base, index } => {
                base.walk(f);
                index.walk(f);
            }
            ExprKind::Range { start, step, end } => {
                start.walk(f);
                if let Some(s) = step {
                    s.walk(f);
                }
                end.walk(f);
            }
            ExprKind::Unary { expr, .. } => expr.walk(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            _ => {}
        }
    }
}

impl Stmt {
    pub fn children(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::For { body, .. } => vec![body],
            StmtKind::If { then_body, else_body, .. } => {
                let mut v: Vec<&[Stmt]> = vec![then_body];
                if let Some(e) = else_body {
                    v.push(e);
                }
                v
            }
            StmtKind::Conjugation { within, apply } => vec![within, apply],
            StmtKind::Repeat { body, fixup, .. } => {
                let mut v: Vec<&[Stmt]> = vec![body];
                if let Some(f) = fixup {
                    v.push(f);
                }
                v
            }
            _ => vec![],
        }
    }
}
