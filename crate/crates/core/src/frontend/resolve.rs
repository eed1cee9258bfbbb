use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::diag::{Diagnostic, Diagnostics, ErrorKind, Span};
use crate::analysis::gates::GateLibrary;

/// Classical helpers usable inside expressions.
pub const EXPR_BUILTINS: &[&str] = &["PI", "Length", "IntAsDouble"];
/// Classical side-effect calls that are dropped with a warning.
pub const IGNORED_CALLS: &[&str] = &["Message", "DumpMachine", "DumpRegister"];

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedProgram {
    pub namespace: Namespace,
    pub entry: usize,
    /// User operations called from each declaration, by name.
    pub callees: Vec<BTreeSet<String>>,
    pub warnings: Vec<Diagnostic>,
}

impl ResolvedProgram {
    pub fn decl(&self, name: &str) -> Option<&OperationDecl> {
        self.namespace.decls.iter().find(|d| d.name == name)
    }

    pub fn entry_decl(&self) -> &OperationDecl {
        &self.namespace.decls[self.entry]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ty {
    Qubit,
    QubitArray(Option<usize>),
    Classical,
    Range,
}

struct Resolver<'a> {
    decls: HashMap<&'a str, &'a OperationDecl>,
    library: &'a GateLibrary,
    scopes: Vec<HashMap<String, Ty>>,
    diags: Vec<Diagnostic>,
    callees: BTreeSet<String>,
}

pub fn resolve_references(ns: Namespace, entry_override: Option<&str>) -> Result<ResolvedProgram, Diagnostics> {
    resolve_with_library(ns, entry_override, GateLibrary::builtin())
}

pub fn resolve_with_library(
    mut ns: Namespace,
    entry_override: Option<&str>,
    library: &GateLibrary,
) -> Result<ResolvedProgram, Diagnostics> {
    let mut diags = Vec::new();
    let mut warnings = Vec::new();

    // Drop classical side-effect calls first so later passes never see them.
    for d in &mut ns.decls {
        strip_ignored(&mut d.body, &mut warnings);
    }

    let mut seen: HashMap<&str, Span> = HashMap::new();
    for d in &ns.decls {
        if seen.insert(&d.name, d.span).is_some() {
            diags.push(Diagnostic::error(d.span, ErrorKind::DuplicateDeclaration(d.name.clone())));
        }
        if library.contains(&d.name) {
            diags.push(Diagnostic::error(d.span, ErrorKind::DuplicateDeclaration(d.name.clone())));
        }
    }

    let mut callees = Vec::with_capacity(ns.decls.len());
    {
        let decl_map: HashMap<&str, &OperationDecl> = ns.decls.iter().map(|d| (d.name.as_str(), d)).collect();
        for d in &ns.decls {
            let mut r = Resolver {
                decls: decl_map.clone(),
                library,
                scopes: vec![HashMap::new()],
                diags: Vec::new(),
                callees: BTreeSet::new(),
            };
            for p in &d.params {
                let ty = match p.kind {
                    ParamKind::Qubit => Ty::Qubit,
                    ParamKind::QubitArray(n) => Ty::QubitArray(n),
                    _ => Ty::Classical,
                };
                r.bind(&p.name, ty);
            }
            r.stmts(&d.body);
            diags.extend(r.diags);
            callees.push(r.callees);
        }
    }

    let entry = match entry_override {
        Some(name) => match ns.decls.iter().position(|d| d.name == name) {
            Some(i) => Some(i),
            None => {
                diags.push(Diagnostic::error(Span::new(1, 1), ErrorKind::UnknownOperation(name.to_string())));
                None
            }
        },
        None => {
            let entries: Vec<usize> = (0..ns.decls.len()).filter(|&i| ns.decls[i].is_entry).collect();
            match entries.len() {
                0 => {
                    diags.push(Diagnostic::error(Span::new(1, 1), ErrorKind::MissingEntryPoint));
                    None
                }
                1 => Some(entries[0]),
                _ => {
                    let names: Vec<&str> = entries.iter().map(|&i| ns.decls[i].name.as_str()).collect();
                    diags.push(Diagnostic::error(
                        ns.decls[entries[1]].span,
                        ErrorKind::DuplicateEntryPoint(names.join(", ")),
                    ));
                    None
                }
            }
        }
    };

    if !diags.is_empty() {
        diags.extend(warnings);
        diags.sort_by_key(|d| (d.span.line, d.span.col));
        return Err(Diagnostics(diags));
    }
    Ok(ResolvedProgram { namespace: ns, entry: entry.expect("entry resolved"), callees, warnings })
}

fn strip_ignored(stmts: &mut Vec<Stmt>, warnings: &mut Vec<Diagnostic>) {
    stmts.retain(|s| match &s.kind {
        StmtKind::Call(c) if IGNORED_CALLS.contains(&c.callee.as_str()) => {
            warnings.push(Diagnostic::warning(s.span, format!("call to `{}` ignored", c.callee)));
            false
        }
        _ => true,
    });
    for s in stmts.iter_mut() {
        match &mut s.kind {
            StmtKind::For { body, .. } => strip_ignored(body, warnings),
            StmtKind::If { then_body, else_body, .. } => {
                strip_ignored(then_body, warnings);
                if let Some(e) = else_body {
                    strip_ignored(e, warnings);
                }
            }
            StmtKind::Conjugation { within, apply } => {
                strip_ignored(within, warnings);
                strip_ignored(apply, warnings);
            }
            StmtKind::Repeat { body, fixup, .. } => {
                strip_ignored(body, warnings);
                if let Some(f) = fixup {
                    strip_ignored(f, warnings);
                }
            }
            _ => {}
        }
    }
}

impl Resolver<'_> {
    fn bind(&mut self, name: &str, ty: Ty) {
        self.scopes.last_mut().expect("scope").insert(name.to_string(), ty);
    }

    fn lookup(&self, name: &str) -> Option<Ty> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn scoped(&mut self, f: impl FnOnce(&mut Self)) {
        self.scopes.push(HashMap::new());
        f(self);
        self.scopes.pop();
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Call(c) => {
                if self.decls.contains_key(c.callee.as_str()) {
                    self.callees.insert(c.callee.clone());
                } else if !self.library.contains(&c.callee) || c.callee == crate::analysis::gates::ALLOC {
                    self.diags.push(Diagnostic::error(c.span, ErrorKind::UnknownOperation(c.callee.clone())));
                }
                for a in &c.args {
                    self.expr(a, true);
                }
            }
            StmtKind::QubitAlloc { name, size } => {
                let ty = match size {
                    None => Ty::Qubit,
                    Some(e) => {
                        self.expr(e, false);
                        match e.kind {
                            ExprKind::Int(n) if n >= 0 => Ty::QubitArray(Some(n as usize)),
                            _ => Ty::QubitArray(None),
                        }
                    }
                };
                self.bind(name, ty);
            }
            StmtKind::Let { name, value } => {
                self.expr(value, false);
                let ty = self.infer(value);
                self.bind(name, ty);
            }
            StmtKind::For { var, iterable, body } => {
                self.expr(iterable, false);
                let elem = match self.infer(iterable) {
                    Ty::QubitArray(_) => Ty::Qubit,
                    _ => Ty::Classical,
                };
                self.scoped(|r| {
                    r.bind(var, elem);
                    r.stmts(body);
                });
            }
            StmtKind::If { cond, then_body, else_body } => {
                self.expr(cond, false);
                self.scoped(|r| r.stmts(then_body));
                if let Some(e) = else_body {
                    self.scoped(|r| r.stmts(e));
                }
            }
            StmtKind::Conjugation { within, apply } => {
                // Bindings made in `within` are visible in `apply`.
                self.scoped(|r| {
                    r.stmts(within);
                    r.scoped(|r| r.stmts(apply));
                });
            }
            StmtKind::Repeat { body, until, fixup } => {
                self.scoped(|r| {
                    r.stmts(body);
                    r.expr(until, false);
                    if let Some(f) = fixup {
                        r.scoped(|r| r.stmts(f));
                    }
                });
            }
        }
    }

    fn infer(&self, e: &Expr) -> Ty {
        match &e.kind {
            ExprKind::Ident(n) => self.lookup(n).unwrap_or(Ty::Classical),
            ExprKind::Index { base, index } => match (self.infer(base), self.infer(index)) {
                (Ty::QubitArray(_), Ty::Range) => Ty::QubitArray(None),
                (Ty::QubitArray(_), _) => Ty::Qubit,
                _ => Ty::Classical,
            },
            ExprKind::Array(items) => {
                if !items.is_empty() && items.iter().all(|i| self.infer(i) == Ty::Qubit) {
                    Ty::QubitArray(Some(items.len()))
                } else {
                    Ty::Classical
                }
            }
            ExprKind::Range { .. } => Ty::Range,
            _ => Ty::Classical,
        }
    }

    fn expr(&mut self, e: &Expr, quantum: bool) {
        match &e.kind {
            ExprKind::Ident(n) => {
                if self.lookup(n).is_none() {
                    let kind = if quantum {
                        ErrorKind::UnknownQubit(n.clone())
                    } else {
                        ErrorKind::UnknownVariable(n.clone())
                    };
                    self.diags.push(Diagnostic::error(e.span, kind));
                }
            }
            ExprKind::Index { base, index } => {
                self.expr(base, true);
                self.expr(index, false);
                if let (ExprKind::Ident(b), ExprKind::Int(k)) = (&base.kind, &index.kind) {
                    if let Some(Ty::QubitArray(Some(len))) = self.lookup(b) {
                        if *k < 0 || *k as usize >= len {
                            self.diags.push(Diagnostic::error(e.span, ErrorKind::UnknownQubit(format!("{b}[{k}]"))));
                        }
                    }
                }
            }
            ExprKind::Call { callee, args } => {
                if !EXPR_BUILTINS.contains(&callee.as_str()) {
                    self.diags.push(Diagnostic::error(e.span, ErrorKind::UnknownOperation(callee.clone())));
                }
                for a in args {
                    self.expr(a, quantum);
                }
            }
            ExprKind::Array(items) | ExprKind::Tuple(items) => {
                for i in items {
                    self.expr(i, quantum);
                }
            }
            ExprKind::Range { start, step, end } => {
                self.expr(start, false);
                if let Some(s) = step {
                    self.expr(s, false);
                }
                self.expr(end, false);
            }
            ExprKind::Unary { expr, .. } => self.expr(expr, false),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.expr(lhs, false);
                self.expr(rhs, false);
            }
            ExprKind::Int(_) | ExprKind::Double(_) | ExprKind::Bool(_) | ExprKind::Str(_) => {}
        }
    }
}
