//! Lowering from the AST to operation lines.
//!
//! Every user operation is lowered once per distinct instance: the key is
//! the declaration name, the length of each `Qubit[]` argument and the
//! canonical text of each classical argument. The entry operation is
//! instance 0.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::cond::{CondAtom, Condition};
use super::ir::*;
use super::param::GateParam;
use crate::analysis::gates::GateLibrary;
use crate::frontend::ast::*;
use crate::frontend::diag::{Diagnostic, ErrorKind, Span};
use crate::frontend::resolve::ResolvedProgram;
use crate::graphs::find_cycle;

pub const DEFAULT_MAX_UNROLL: usize = 16;
const MAX_INSTANCES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("{line}:{col}: unroll bound {bound} exceeded")]
    UnrollBoundExceeded { line: u32, col: u32, bound: usize },
    #[error("{line}:{col}: iterable is not statically known")]
    NonStaticIterable { line: u32, col: u32 },
    #[error("{line}:{col}: qubit array size is not a compile-time constant")]
    NonStaticSize { line: u32, col: u32 },
    #[error("{line}:{col}: division by zero")]
    DivisionByZero { line: u32, col: u32 },
    #[error("recursion detected: {}", .0.join(" -> "))]
    RecursionDetected(Vec<String>),
    #[error("{line}:{col}: `{op}` expects {expected} argument(s), found {found}")]
    ArityMismatch { line: u32, col: u32, op: String, expected: usize, found: usize },
    #[error("{line}:{col}: qubit `{qubit}` used more than once in one call")]
    AliasConflict { line: u32, col: u32, qubit: String },
    #[error("{line}:{col}: qubit allocation inside a `within` block")]
    AllocInWithin { line: u32, col: u32 },
    #[error("{line}:{col}: {msg}")]
    Invalid { line: u32, col: u32, msg: String },
}

impl LowerError {
    pub fn span(&self) -> Span {
        match self {
            LowerError::UnrollBoundExceeded { line, col, .. }
            | LowerError::NonStaticIterable { line, col }
            | LowerError::NonStaticSize { line, col }
            | LowerError::DivisionByZero { line, col }
            | LowerError::ArityMismatch { line, col, .. }
            | LowerError::AliasConflict { line, col, .. }
            | LowerError::AllocInWithin { line, col }
            | LowerError::Invalid { line, col, .. } => Span::new(*line, *col),
            LowerError::RecursionDetected(_) => Span::new(1, 1),
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let msg = self.to_string();
        // Drop the position prefix; the diagnostic carries it.
        let msg = match self {
            LowerError::RecursionDetected(_) => msg,
            _ => msg.splitn(3, ':').nth(2).map(|s| s.trim().to_string()).unwrap_or(msg),
        };
        Diagnostic::error(self.span(), ErrorKind::Unsupported(msg))
    }
}

fn invalid(span: Span, msg: impl Into<String>) -> LowerError {
    LowerError::Invalid { line: span.line, col: span.col, msg: msg.into() }
}

/// A classical value supplied from outside, e.g. by `--assume a=1`.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalValue {
    Int(i64),
    Bool(bool),
    Double(f64),
}

impl ClassicalValue {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "true" => Some(ClassicalValue::Bool(true)),
            "false" => Some(ClassicalValue::Bool(false)),
            _ => text
                .parse::<i64>()
                .map(ClassicalValue::Int)
                .ok()
                .or_else(|| text.parse::<f64>().ok().map(ClassicalValue::Double)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowerOptions {
    pub max_unroll: usize,
    /// Values for the entry operation's classical parameters.
    pub bindings: BTreeMap<String, ClassicalValue>,
}

impl Default for LowerOptions {
    fn default() -> Self {
        Self { max_unroll: DEFAULT_MAX_UNROLL, bindings: BTreeMap::new() }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Int(i64),
    Num(GateParam),
    Bool(bool),
    /// Classical value unknown at lowering time. `compound` marks texts that
    /// need parentheses when nested.
    Sym {
        text: String,
        compound: bool,
    },
    /// Boolean that depends on unknown classical values: a conjunction.
    Cond(Vec<CondAtom>),
    Qubit(QubitRef),
    Qubits(Vec<QubitRef>),
    Range(Vec<i64>),
    Array(Vec<Value>),
    Tuple(Vec<Value>),
    Str,
}

impl Value {
    fn canonical(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Num(p) => p.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Sym { text, compound } => {
                if *compound {
                    format!("({text})")
                } else {
                    text.clone()
                }
            }
            Value::Cond(atoms) => conj_text(atoms),
            Value::Qubit(q) => q.to_string(),
            Value::Qubits(qs) => format!("[{}]", qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")),
            Value::Range(r) => format!("{r:?}"),
            Value::Array(v) | Value::Tuple(v) => {
                format!("[{}]", v.iter().map(|x| x.canonical()).collect::<Vec<_>>().join(","))
            }
            Value::Str => "\"\"".into(),
        }
    }

    fn is_const(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Num(_) | Value::Bool(_))
    }

    fn as_param(&self) -> Option<GateParam> {
        match self {
            Value::Int(v) => Some(GateParam::int(*v)),
            Value::Num(p) => Some(p.clone()),
            Value::Sym { text, .. } => {
                // Leading minus signs come only from negation.
                let body = text.trim_start_matches('-');
                if body.len() == text.len() {
                    return Some(GateParam::symbol(self.canonical()));
                }
                let p = GateParam::symbol(body);
                Some(if (text.len() - body.len()) % 2 == 1 { p.neg() } else { p })
            }
            _ => None,
        }
    }
}

fn atom_text(a: &CondAtom) -> String {
    if a.positive {
        a.text.clone()
    } else {
        format!("!({})", a.text)
    }
}

fn conj_text(atoms: &[CondAtom]) -> String {
    if atoms.len() == 1 {
        return atom_text(&atoms[0]);
    }
    let mut parts: Vec<String> = atoms.iter().map(atom_text).collect();
    parts.sort();
    format!("({})", parts.join("&&"))
}

#[derive(Debug, Clone)]
enum CondVal {
    Const(bool),
    Conj(Vec<CondAtom>),
}

impl CondVal {
    fn not(self) -> CondVal {
        match self {
            CondVal::Const(b) => CondVal::Const(!b),
            CondVal::Conj(atoms) if atoms.len() == 1 => CondVal::Conj(vec![atoms[0].negated()]),
            CondVal::Conj(atoms) => CondVal::Conj(vec![CondAtom::new(conj_text(&atoms), false)]),
        }
    }

    fn apply(&self, base: &Condition) -> Condition {
        match self {
            CondVal::Const(true) => base.clone(),
            CondVal::Const(false) => Condition::never(),
            CondVal::Conj(atoms) => atoms.iter().fold(base.clone(), |c, a| c.with(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct InstanceKey {
    decl: String,
    lens: Vec<usize>,
    classical: Vec<String>,
}

struct Instance {
    key: InstanceKey,
    env: Vec<(String, Value)>,
    formals: Vec<Formal>,
}

/// Lower the whole program reachable from its entry point.
pub fn lower_program(program: &ResolvedProgram, opts: &LowerOptions) -> Result<LoweredProgram, LowerError> {
    lower_program_with_library(program, GateLibrary::builtin(), opts)
}

pub fn lower_program_with_library(
    program: &ResolvedProgram,
    lib: &GateLibrary,
    opts: &LowerOptions,
) -> Result<LoweredProgram, LowerError> {
    check_recursion(program)?;
    let entry = program.entry_decl();
    let mut env = Vec::new();
    let mut classical = Vec::new();
    for p in &entry.params {
        if p.kind.is_quantum() {
            return Err(invalid(p.span, format!("entry operation parameter `{}` must be classical", p.name)));
        }
        let v = match opts.bindings.get(&p.name) {
            Some(ClassicalValue::Int(i)) => Value::Int(*i),
            Some(ClassicalValue::Bool(b)) => Value::Bool(*b),
            Some(ClassicalValue::Double(d)) => Value::Num(GateParam::literal(&d.to_string())),
            None => Value::Sym { text: p.name.clone(), compound: false },
        };
        classical.push(v.canonical());
        env.push((p.name.clone(), v));
    }
    let root =
        Instance { key: InstanceKey { decl: entry.name.clone(), lens: vec![], classical }, env, formals: vec![] };
    let mut l = Lowerer::new(program, lib, opts);
    l.run(root)
}

/// Lower one declaration on its own. `Qubit[]` lengths come from `lens` when
/// given, otherwise from the largest constant index the body uses. Classical
/// parameters stay symbolic; callees are not lowered.
pub fn lower_operation(
    program: &ResolvedProgram,
    name: &str,
    lens: Option<&[usize]>,
    opts: &LowerOptions,
) -> Result<LoweredOperation, LowerError> {
    let decl = program.decl(name).ok_or_else(|| invalid(Span::new(1, 1), format!("unknown operation `{name}`")))?;
    let mut l = Lowerer::new(program, GateLibrary::builtin(), opts);
    let mut array_no = 0;
    let mut env = Vec::new();
    let mut formals = Vec::new();
    let mut key_lens = Vec::new();
    for p in &decl.params {
        match p.kind {
            ParamKind::Qubit => {
                let q = QubitRef::scalar(&p.name);
                formals.push(Formal { name: p.name.clone(), qubits: vec![q.clone()] });
                env.push((p.name.clone(), Value::Qubit(q)));
            }
            ParamKind::QubitArray(_) => {
                let n = match lens {
                    Some(ls) => *ls.get(array_no).ok_or(LowerError::ArityMismatch {
                        line: decl.span.line,
                        col: decl.span.col,
                        op: name.to_string(),
                        expected: array_no + 1,
                        found: ls.len(),
                    })?,
                    None => max_static_index(&decl.body, &p.name).map_or(0, |m| m + 1),
                };
                array_no += 1;
                key_lens.push(n);
                let qs: Vec<QubitRef> = (0..n).map(|i| QubitRef::indexed(&p.name, i)).collect();
                formals.push(Formal { name: p.name.clone(), qubits: qs.clone() });
                env.push((p.name.clone(), Value::Qubits(qs)));
            }
            _ => env.push((p.name.clone(), Value::Sym { text: p.name.clone(), compound: false })),
        }
    }
    let inst =
        Instance { key: InstanceKey { decl: name.to_string(), lens: key_lens, classical: vec![] }, env, formals };
    l.instances.push(inst.key.clone());
    let lines = l.lower_instance(&inst)?;
    Ok(LoweredOperation { name: name.to_string(), decl: name.to_string(), formals: inst.formals, lines })
}

fn max_static_index(body: &[Stmt], name: &str) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut visit = |e: &Expr| {
        e.walk(&mut |x| {
            if let ExprKind::Index { base, index } = &x.kind {
                if let (ExprKind::Ident(b), ExprKind::Int(k)) = (&base.kind, &index.kind) {
                    if b == name && *k >= 0 {
                        best = Some(best.map_or(*k as usize, |m: usize| m.max(*k as usize)));
                    }
                }
            }
        })
    };
    fn walk_stmts(stmts: &[Stmt], visit: &mut dyn FnMut(&Expr)) {
        for s in stmts {
            match &s.kind {
                StmtKind::Call(c) => c.args.iter().for_each(&mut *visit),
                StmtKind::QubitAlloc { size: Some(e), .. } => visit(e),
                StmtKind::Let { value, .. } => visit(value),
                StmtKind::For { iterable, .. } => visit(iterable),
                StmtKind::If { cond, .. } => visit(cond),
                StmtKind::Repeat { until, .. } => visit(until),
                _ => {}
            }
            for child in s.children() {
                walk_stmts(child, visit);
            }
        }
    }
    walk_stmts(body, &mut visit);
    best
}

fn check_recursion(program: &ResolvedProgram) -> Result<(), LowerError> {
    let adj: BTreeMap<String, BTreeSet<String>> =
        program.namespace.decls.iter().zip(&program.callees).map(|(d, c)| (d.name.clone(), c.clone())).collect();
    match find_cycle(&adj) {
        Some(cycle) => Err(LowerError::RecursionDetected(cycle)),
        None => Ok(()),
    }
}

struct Lowerer<'a> {
    program: &'a ResolvedProgram,
    lib: &'a GateLibrary,
    opts: &'a LowerOptions,
    instances: Vec<InstanceKey>,
    index: HashMap<InstanceKey, usize>,
    pending: VecDeque<Instance>,
}

impl<'a> Lowerer<'a> {
    fn new(program: &'a ResolvedProgram, lib: &'a GateLibrary, opts: &'a LowerOptions) -> Self {
        Self { program, lib, opts, instances: Vec::new(), index: HashMap::new(), pending: VecDeque::new() }
    }

    fn run(&mut self, root: Instance) -> Result<LoweredProgram, LowerError> {
        self.index.insert(root.key.clone(), 0);
        self.instances.push(root.key.clone());
        self.pending.push_back(root);
        let mut ops: Vec<Option<LoweredOperation>> = vec![None];
        let mut order = Vec::new();
        while let Some(inst) = self.pending.pop_front() {
            let idx = self.index[&inst.key];
            let lines = self.lower_instance(&inst)?;
            while ops.len() < self.instances.len() {
                ops.push(None);
            }
            ops[idx] = Some(LoweredOperation {
                name: inst.key.decl.clone(),
                decl: inst.key.decl.clone(),
                formals: inst.formals,
                lines,
            });
            order.push(idx);
        }
        let mut ops: Vec<LoweredOperation> = ops.into_iter().map(|o| o.expect("every instance lowered")).collect();

        // Display names: `name#k` only when a declaration has several instances.
        let mut per_decl: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, o) in ops.iter().enumerate() {
            per_decl.entry(o.decl.clone()).or_default().push(i);
        }
        for idxs in per_decl.values() {
            if idxs.len() > 1 {
                for (k, &i) in idxs.iter().enumerate() {
                    ops[i].name = format!("{}#{}", ops[i].decl, k + 1);
                }
            }
        }
        let names: Vec<String> = ops.iter().map(|o| o.name.clone()).collect();
        for o in &mut ops {
            for l in &mut o.lines {
                if let LineKind::Call(i) = l.kind {
                    l.op = names[i].clone();
                }
            }
        }
        Ok(LoweredProgram { ops, entry: 0 })
    }

    fn lower_instance(&mut self, inst: &Instance) -> Result<Vec<OperationLine>, LowerError> {
        let decl = self.program.decl(&inst.key.decl).expect("instance of a known declaration");
        let mut ctx =
            OpCtx { scopes: vec![HashMap::new()], lines: Vec::new(), alloc_counts: HashMap::new(), in_within: 0 };
        for (name, v) in &inst.env {
            ctx.bind(name, v.clone());
            ctx.alloc_counts.insert(name.clone(), 1);
        }
        self.stmts(&mut ctx, &decl.body, &Condition::always())?;
        Ok(ctx.lines)
    }

    fn stmts(&mut self, ctx: &mut OpCtx, stmts: &[Stmt], cond: &Condition) -> Result<(), LowerError> {
        for s in stmts {
            self.stmt(ctx, s, cond)?;
        }
        Ok(())
    }

    fn scoped(
        &mut self,
        ctx: &mut OpCtx,
        f: impl FnOnce(&mut Self, &mut OpCtx) -> Result<(), LowerError>,
    ) -> Result<(), LowerError> {
        ctx.scopes.push(HashMap::new());
        let r = f(self, ctx);
        ctx.scopes.pop();
        r
    }

    fn stmt(&mut self, ctx: &mut OpCtx, s: &Stmt, cond: &Condition) -> Result<(), LowerError> {
        match &s.kind {
            StmtKind::Call(c) => self.call(ctx, c, cond, s.span),
            StmtKind::QubitAlloc { name, size } => {
                if ctx.in_within > 0 {
                    return Err(LowerError::AllocInWithin { line: s.span.line, col: s.span.col });
                }
                let unique = ctx.fresh_name(name);
                let (value, targets) = match size {
                    None => {
                        let q = QubitRef::scalar(&unique);
                        (Value::Qubit(q.clone()), vec![q])
                    }
                    Some(e) => {
                        let n = match ctx.eval(e)? {
                            Value::Int(n) if n >= 0 => n as usize,
                            _ => return Err(LowerError::NonStaticSize { line: e.span.line, col: e.span.col }),
                        };
                        let qs: Vec<QubitRef> = (0..n).map(|i| QubitRef::indexed(&unique, i)).collect();
                        (Value::Qubits(qs.clone()), qs)
                    }
                };
                ctx.bind(name, value);
                if !targets.is_empty() {
                    let id = ctx.lines.len();
                    ctx.lines.push(OperationLine::alloc(id, targets, cond.clone(), s.span.line));
                }
                Ok(())
            }
            StmtKind::Let { name, value } => {
                let v = ctx.eval(value)?;
                ctx.bind(name, v);
                Ok(())
            }
            StmtKind::For { var, iterable, body } => {
                let items: Vec<Value> = match ctx.eval(iterable)? {
                    Value::Range(r) => r.into_iter().map(Value::Int).collect(),
                    Value::Qubits(qs) => qs.into_iter().map(Value::Qubit).collect(),
                    Value::Array(v) => v,
                    _ => {
                        return Err(LowerError::NonStaticIterable { line: iterable.span.line, col: iterable.span.col })
                    }
                };
                if items.len() > self.opts.max_unroll {
                    return Err(LowerError::UnrollBoundExceeded {
                        line: s.span.line,
                        col: s.span.col,
                        bound: self.opts.max_unroll,
                    });
                }
                for item in items {
                    self.scoped(ctx, |l, ctx| {
                        ctx.bind(var, item);
                        l.stmts(ctx, body, cond)
                    })?;
                }
                Ok(())
            }
            StmtKind::If { cond: c, then_body, else_body } => {
                let cv = ctx.eval_cond(c)?;
                let then_cond = cv.apply(cond);
                if !then_cond.is_dead() {
                    self.scoped(ctx, |l, ctx| l.stmts(ctx, then_body, &then_cond))?;
                }
                if let Some(e) = else_body {
                    let else_cond = cv.not().apply(cond);
                    if !else_cond.is_dead() {
                        self.scoped(ctx, |l, ctx| l.stmts(ctx, e, &else_cond))?;
                    }
                }
                Ok(())
            }
            StmtKind::Conjugation { within, apply } => self.scoped(ctx, |l, ctx| {
                let start = ctx.lines.len();
                ctx.in_within += 1;
                let r = l.stmts(ctx, within, cond);
                ctx.in_within -= 1;
                r?;
                let end = ctx.lines.len();
                l.scoped(ctx, |l, ctx| l.stmts(ctx, apply, cond))?;
                for i in (start..end).rev() {
                    let mut line = ctx.lines[i].clone();
                    line.id = ctx.lines.len();
                    line.functor = line.functor.adjoint();
                    ctx.lines.push(line);
                }
                Ok(())
            }),
            StmtKind::Repeat { body, until, fixup } => {
                self.scoped(ctx, |l, ctx| l.stmts(ctx, body, cond))?;
                let again = match ctx.eval_cond(until)? {
                    CondVal::Const(true) => return Ok(()),
                    CondVal::Const(false) => {
                        return Err(LowerError::UnrollBoundExceeded {
                            line: s.span.line,
                            col: s.span.col,
                            bound: self.opts.max_unroll,
                        })
                    }
                    cv => cv.not().apply(cond),
                };
                if again.is_dead() {
                    return Ok(());
                }
                for _ in 0..self.opts.max_unroll {
                    if let Some(f) = fixup {
                        self.scoped(ctx, |l, ctx| l.stmts(ctx, f, &again))?;
                    }
                    self.scoped(ctx, |l, ctx| l.stmts(ctx, body, &again))?;
                }
                Ok(())
            }
        }
    }

    fn call(&mut self, ctx: &mut OpCtx, c: &CallExpr, cond: &Condition, span: Span) -> Result<(), LowerError> {
        let mut adjoint = false;
        let mut controls: Vec<QubitRef> = Vec::new();
        let mut args: Vec<&Expr> = c.args.iter().collect();
        for f in &c.functors {
            match f {
                FunctorKw::Adjoint => adjoint = !adjoint,
                FunctorKw::Controlled => {
                    if args.len() != 2 {
                        return Err(invalid(span, "a controlled call takes (controls, arguments)"));
                    }
                    controls.extend(ctx.qubits_of(args[0])?);
                    args = match &args[1].kind {
                        ExprKind::Tuple(items) => items.iter().collect(),
                        _ => vec![args[1]],
                    };
                }
            }
        }

        let mut name = c.callee.as_str();
        if let Some(alias) = self.lib.alias(name) {
            if args.len() < alias.controls {
                return Err(LowerError::ArityMismatch {
                    line: span.line,
                    col: span.col,
                    op: c.callee.clone(),
                    expected: alias.controls + 1,
                    found: args.len(),
                });
            }
            for a in args.drain(..alias.controls) {
                controls.push(ctx.qubit_of(a)?);
            }
            name = &alias.gate;
        }

        if let Some(spec) = self.lib.get(name) {
            if args.len() != spec.params + 1 {
                return Err(LowerError::ArityMismatch {
                    line: span.line,
                    col: span.col,
                    op: c.callee.clone(),
                    expected: spec.params + 1,
                    found: args.len(),
                });
            }
            let mut params = Vec::new();
            for a in &args[..spec.params] {
                let v = ctx.eval(a)?;
                params.push(v.as_param().ok_or_else(|| invalid(a.span, "gate parameter must be numeric"))?);
            }
            let target = ctx.qubit_of(args[spec.params])?;
            check_distinct(&controls, std::slice::from_ref(&target), span)?;
            let id = ctx.lines.len();
            ctx.lines.push(OperationLine {
                id,
                functor: Functor::from_parts(adjoint, !controls.is_empty()),
                op: spec.name.clone(),
                params,
                kind: LineKind::Gate,
                control: ControlSpec { condition: cond.clone(), qcontrol: controls },
                targets: vec![target],
                source_line: span.line,
            });
            return Ok(());
        }

        let decl = self.program.decl(name).ok_or_else(|| invalid(span, format!("unknown operation `{name}`")))?;
        if args.len() != decl.params.len() {
            return Err(LowerError::ArityMismatch {
                line: span.line,
                col: span.col,
                op: name.to_string(),
                expected: decl.params.len(),
                found: args.len(),
            });
        }
        let mut env = Vec::new();
        let mut formals = Vec::new();
        let mut lens = Vec::new();
        let mut classical = Vec::new();
        let mut targets = Vec::new();
        for (p, a) in decl.params.iter().zip(&args) {
            match p.kind {
                ParamKind::Qubit => {
                    let q = ctx.qubit_of(a)?;
                    let f = QubitRef::scalar(&p.name);
                    formals.push(Formal { name: p.name.clone(), qubits: vec![f.clone()] });
                    env.push((p.name.clone(), Value::Qubit(f)));
                    targets.push(q);
                }
                ParamKind::QubitArray(_) => {
                    let qs = ctx.qubits_of(a)?;
                    let fs: Vec<QubitRef> = (0..qs.len()).map(|i| QubitRef::indexed(&p.name, i)).collect();
                    lens.push(qs.len());
                    formals.push(Formal { name: p.name.clone(), qubits: fs.clone() });
                    env.push((p.name.clone(), Value::Qubits(fs)));
                    targets.extend(qs);
                }
                _ => {
                    let v = ctx.eval(a)?;
                    if !(v.is_const() || matches!(v, Value::Sym { .. } | Value::Cond(_))) {
                        return Err(invalid(a.span, format!("argument for `{}` must be classical", p.name)));
                    }
                    classical.push(v.canonical());
                    env.push((p.name.clone(), v));
                }
            }
        }
        check_distinct(&controls, &targets, span)?;
        let key = InstanceKey { decl: decl.name.clone(), lens, classical };
        let idx = match self.index.get(&key) {
            Some(&i) => i,
            None => {
                if self.instances.len() >= MAX_INSTANCES {
                    return Err(invalid(span, "too many operation instances"));
                }
                let i = self.instances.len();
                self.index.insert(key.clone(), i);
                self.instances.push(key.clone());
                self.pending.push_back(Instance { key, env, formals });
                i
            }
        };
        let id = ctx.lines.len();
        ctx.lines.push(OperationLine {
            id,
            functor: Functor::from_parts(adjoint, !controls.is_empty()),
            op: decl.name.clone(),
            params: Vec::new(),
            kind: LineKind::Call(idx),
            control: ControlSpec { condition: cond.clone(), qcontrol: controls },
            targets,
            source_line: span.line,
        });
        Ok(())
    }
}

fn check_distinct(controls: &[QubitRef], targets: &[QubitRef], span: Span) -> Result<(), LowerError> {
    let mut seen = BTreeSet::new();
    for q in controls.iter().chain(targets) {
        if !seen.insert(q) {
            return Err(LowerError::AliasConflict { line: span.line, col: span.col, qubit: q.to_string() });
        }
    }
    Ok(())
}

struct OpCtx {
    scopes: Vec<HashMap<String, Value>>,
    lines: Vec<OperationLine>,
    alloc_counts: HashMap<String, usize>,
    in_within: usize,
}

impl OpCtx {
    fn bind(&mut self, name: &str, v: Value) {
        self.scopes.last_mut().expect("scope").insert(name.to_string(), v);
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    /// `name` the first time, then `name#1`, `name#2`, ...
    fn fresh_name(&mut self, name: &str) -> String {
        let n = self.alloc_counts.entry(name.to_string()).or_insert(0);
        let unique = if *n == 0 { name.to_string() } else { format!("{name}#{n}") };
        *n += 1;
        unique
    }

    fn qubit_of(&self, e: &Expr) -> Result<QubitRef, LowerError> {
        match self.eval(e)? {
            Value::Qubit(q) => Ok(q),
            _ => Err(invalid(e.span, "expected a qubit")),
        }
    }

    fn qubits_of(&self, e: &Expr) -> Result<Vec<QubitRef>, LowerError> {
        match self.eval(e)? {
            Value::Qubit(q) => Ok(vec![q]),
            Value::Qubits(qs) => Ok(qs),
            Value::Array(items) if items.is_empty() => Ok(vec![]),
            _ => Err(invalid(e.span, "expected qubits")),
        }
    }

    fn eval(&self, e: &Expr) -> Result<Value, LowerError> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Double(t) => Value::Num(GateParam::literal(t)),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Str(_) => Value::Str,
            ExprKind::Ident(n) => {
                self.lookup(n).cloned().ok_or_else(|| invalid(span, format!("unknown name `{n}`")))?
            }
            ExprKind::Call { callee, args } => {
                let vals = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                match (callee.as_str(), vals.as_slice()) {
                    ("PI", []) => Value::Num(GateParam::pi()),
                    ("Length", [Value::Qubits(qs)]) => Value::Int(qs.len() as i64),
                    ("Length", [Value::Array(v)]) => Value::Int(v.len() as i64),
                    ("IntAsDouble", [Value::Int(v)]) => Value::Num(GateParam::int(*v)),
                    ("IntAsDouble", [s @ Value::Sym { .. }]) => s.clone(),
                    _ => return Err(invalid(span, format!("cannot evaluate `{callee}` here"))),
                }
            }
            ExprKind::Index { base, index } => {
                let b = self.eval(base)?;
                let i = self.eval(index)?;
                match (b, i) {
                    (Value::Qubits(qs), Value::Int(k)) => {
                        let q = usize::try_from(k).ok().and_then(|k| qs.get(k).cloned());
                        Value::Qubit(q.ok_or_else(|| invalid(span, format!("index {k} out of range")))?)
                    }
                    (Value::Qubits(qs), Value::Range(r)) => {
                        let mut out = Vec::new();
                        for k in r {
                            let q = usize::try_from(k).ok().and_then(|k| qs.get(k).cloned());
                            out.push(q.ok_or_else(|| invalid(span, format!("index {k} out of range")))?);
                        }
                        Value::Qubits(out)
                    }
                    (Value::Array(items), Value::Int(k)) => usize::try_from(k)
                        .ok()
                        .and_then(|k| items.get(k).cloned())
                        .ok_or_else(|| invalid(span, format!("index {k} out of range")))?,
                    (_, Value::Sym { .. }) => return Err(invalid(span, "qubit index is not statically known")),
                    _ => return Err(invalid(span, "invalid index expression")),
                }
            }
            ExprKind::Array(items) => {
                let vals = items.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                if !vals.is_empty() && vals.iter().all(|v| matches!(v, Value::Qubit(_))) {
                    Value::Qubits(
                        vals.into_iter()
                            .map(|v| match v {
                                Value::Qubit(q) => q,
                                _ => unreachable!(),
                            })
                            .collect(),
                    )
                } else {
                    Value::Array(vals)
                }
            }
            ExprKind::Tuple(items) => Value::Tuple(items.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?),
            ExprKind::Range { start, step, end } => {
                let as_int = |e: &Expr| -> Result<i64, LowerError> {
                    match self.eval(e)? {
                        Value::Int(v) => Ok(v),
                        _ => Err(LowerError::NonStaticIterable { line: e.span.line, col: e.span.col }),
                    }
                };
                let (a, b) = (as_int(start)?, as_int(end)?);
                let st = match step {
                    Some(s) => as_int(s)?,
                    None => 1,
                };
                if st == 0 {
                    return Err(invalid(span, "range step is zero"));
                }
                let mut r = Vec::new();
                let mut k = a;
                while (st > 0 && k <= b) || (st < 0 && k >= b) {
                    r.push(k);
                    if r.len() > 1 << 16 {
                        return Err(invalid(span, "range too large"));
                    }
                    k += st;
                }
                Value::Range(r)
            }
            ExprKind::Unary { op: UnOp::Neg, expr } => match self.eval(expr)? {
                Value::Int(v) => Value::Int(-v),
                Value::Num(p) => Value::Num(p.neg()),
                s @ Value::Sym { .. } => Value::Sym { text: format!("-{}", s.canonical()), compound: true },
                _ => return Err(invalid(span, "cannot negate this value")),
            },
            ExprKind::Unary { op: UnOp::Not, .. } | ExprKind::Binary { op: BinOp::And | BinOp::Or, .. } => {
                cond_value(self.eval_cond(e)?)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                if matches!(op, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge) {
                    return Ok(cond_value(self.eval_cond(e)?));
                }
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                arith(*op, l, r, span)?
            }
        })
    }

    fn eval_cond(&self, e: &Expr) -> Result<CondVal, LowerError> {
        let span = e.span;
        match &e.kind {
            ExprKind::Unary { op: UnOp::Not, expr } => Ok(self.eval_cond(expr)?.not()),
            ExprKind::Binary { op: BinOp::And, lhs, rhs } => Ok(match (self.eval_cond(lhs)?, self.eval_cond(rhs)?) {
                (CondVal::Const(false), _) | (_, CondVal::Const(false)) => CondVal::Const(false),
                (CondVal::Const(true), x) | (x, CondVal::Const(true)) => x,
                (CondVal::Conj(mut a), CondVal::Conj(b)) => {
                    for x in b {
                        if a.iter().any(|y| y.text == x.text && y.positive != x.positive) {
                            return Ok(CondVal::Const(false));
                        }
                        if !a.contains(&x) {
                            a.push(x);
                        }
                    }
                    CondVal::Conj(a)
                }
            }),
            ExprKind::Binary { op: BinOp::Or, lhs, rhs } => Ok(match (self.eval_cond(lhs)?, self.eval_cond(rhs)?) {
                (CondVal::Const(true), _) | (_, CondVal::Const(true)) => CondVal::Const(true),
                (CondVal::Const(false), x) | (x, CondVal::Const(false)) => x,
                (CondVal::Conj(a), CondVal::Conj(b)) => {
                    let mut parts = [conj_text(&a), conj_text(&b)];
                    parts.sort();
                    CondVal::Conj(vec![CondAtom::new(format!("{}||{}", parts[0], parts[1]), true)])
                }
            }),
            ExprKind::Binary { op, lhs, rhs }
                if matches!(op, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge) =>
            {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                compare(*op, l, r, span)
            }
            _ => match self.eval(e)? {
                Value::Bool(b) => Ok(CondVal::Const(b)),
                Value::Cond(atoms) => Ok(CondVal::Conj(atoms)),
                s @ Value::Sym { .. } => Ok(CondVal::Conj(vec![CondAtom::new(s.canonical(), true)])),
                _ => Err(invalid(span, "condition is not boolean")),
            },
        }
    }
}

fn cond_value(c: CondVal) -> Value {
    match c {
        CondVal::Const(b) => Value::Bool(b),
        CondVal::Conj(atoms) => Value::Cond(atoms),
    }
}

fn arith(op: BinOp, l: Value, r: Value, span: Span) -> Result<Value, LowerError> {
    let div0 = || LowerError::DivisionByZero { line: span.line, col: span.col };
    Ok(match (&l, &r) {
        (Value::Int(a), Value::Int(b)) => Value::Int(
            match op {
                BinOp::Add => a.checked_add(*b),
                BinOp::Sub => a.checked_sub(*b),
                BinOp::Mul => a.checked_mul(*b),
                BinOp::Div => {
                    if *b == 0 {
                        return Err(div0());
                    }
                    a.checked_div(*b)
                }
                BinOp::Mod => {
                    if *b == 0 {
                        return Err(div0());
                    }
                    a.checked_rem(*b)
                }
                _ => None,
            }
            .ok_or_else(|| invalid(span, "integer overflow"))?,
        ),
        (Value::Int(_) | Value::Num(_), Value::Int(_) | Value::Num(_)) => {
            let a = l.as_param().expect("numeric");
            let b = r.as_param().expect("numeric");
            Value::Num(match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => a.div(&b).map_err(|_| div0())?,
                _ => return Err(invalid(span, format!("operator `{}` is not supported on doubles", op.symbol()))),
            })
        }
        (Value::Sym { .. } | Value::Int(_) | Value::Num(_), Value::Sym { .. } | Value::Int(_) | Value::Num(_)) => {
            if matches!(op, BinOp::Div | BinOp::Mod) && matches!(r, Value::Int(0)) {
                return Err(div0());
            }
            Value::Sym { text: format!("{}{}{}", l.canonical(), op.symbol(), r.canonical()), compound: true }
        }
        _ => return Err(invalid(span, format!("operator `{}` needs numeric operands", op.symbol()))),
    })
}

fn compare(op: BinOp, l: Value, r: Value, span: Span) -> Result<CondVal, LowerError> {
    if l.is_const() && r.is_const() {
        let b = match (&l, &r) {
            (Value::Bool(a), Value::Bool(b)) => match op {
                BinOp::Eq => a == b,
                BinOp::Ne => a != b,
                _ => return Err(invalid(span, "booleans only compare for equality")),
            },
            (Value::Int(a), Value::Int(b)) => ordering(op, a.cmp(b)),
            _ => {
                let (Some(a), Some(b)) = (l.as_param().and_then(|p| p.to_f64()), r.as_param().and_then(|p| p.to_f64()))
                else {
                    return Err(invalid(span, "incomparable values"));
                };
                match a.partial_cmp(&b) {
                    Some(o) => ordering(op, o),
                    None => return Err(invalid(span, "incomparable values")),
                }
            }
        };
        return Ok(CondVal::Const(b));
    }
    if !matches!(l, Value::Int(_) | Value::Num(_) | Value::Bool(_) | Value::Sym { .. } | Value::Cond(_))
        || !matches!(r, Value::Int(_) | Value::Num(_) | Value::Bool(_) | Value::Sym { .. } | Value::Cond(_))
    {
        return Err(invalid(span, "comparison needs classical operands"));
    }
    let (a, b) = (l.canonical(), r.canonical());
    Ok(match op {
        BinOp::Eq | BinOp::Ne => {
            // Literals go last; otherwise sort the two sides.
            let (x, y) = match (l.is_const(), r.is_const()) {
                (true, false) => (b, a),
                (false, true) => (a, b),
                _ if a <= b => (a, b),
                _ => (b, a),
            };
            CondVal::Conj(vec![CondAtom::new(format!("{x}=={y}"), op == BinOp::Eq)])
        }
        BinOp::Lt => CondVal::Conj(vec![CondAtom::new(format!("{a}<{b}"), true)]),
        BinOp::Le => CondVal::Conj(vec![CondAtom::new(format!("{a}<={b}"), true)]),
        BinOp::Gt => CondVal::Conj(vec![CondAtom::new(format!("{b}<{a}"), true)]),
        BinOp::Ge => CondVal::Conj(vec![CondAtom::new(format!("{b}<={a}"), true)]),
        _ => unreachable!("not a comparison"),
    })
}

fn ordering(op: BinOp, o: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        BinOp::Eq => o == Equal,
        BinOp::Ne => o != Equal,
        BinOp::Lt => o == Less,
        BinOp::Le => o != Greater,
        BinOp::Gt => o == Greater,
        BinOp::Ge => o != Less,
        _ => false,
    }
}
