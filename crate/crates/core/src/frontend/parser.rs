use super::ast::*;
use super::diag::{Diagnostic, Diagnostics, ErrorKind, Span};
use super::lexer::{tokenize, Tok, Token};

/// Calls that observe qubits. Any of these anywhere in the input is a hard
/// error: the transfer functions have no rule for them.
pub const MEASUREMENTS: &[&str] =
    &["M", "Measure", "MResetZ", "MResetX", "MResetY", "MultiM", "MeasureEachZ", "MeasureAllZ"];
pub const RESETS: &[&str] = &["Reset", "ResetAll"];

/// Successful parse: the namespace and any warnings for ignored statements.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub namespace: Namespace,
    pub warnings: Vec<Diagnostic>,
}

pub fn parse_program(src: &SourceProgram) -> Result<Parsed, Diagnostics> {
    parse_str(&src.text)
}

pub fn parse_str(text: &str) -> Result<Parsed, Diagnostics> {
    let tokens = tokenize(text).map_err(|d| Diagnostics(vec![d]))?;
    let mut p = Parser { toks: tokens, pos: 0, diags: Vec::new() };
    match p.namespace() {
        Ok(ns) => {
            if p.diags.iter().any(|d| d.is_error()) {
                Err(Diagnostics(p.diags))
            } else {
                Ok(Parsed { namespace: ns, warnings: p.diags })
            }
        }
        Err(d) => {
            p.diags.push(d);
            Err(Diagnostics(p.diags))
        }
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

fn syntax(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(span, ErrorKind::Syntax(msg.into()))
}

fn unsupported(span: Span, what: impl Into<String>) -> Diagnostic {
    Diagnostic::error(span, ErrorKind::Unsupported(what.into()))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.is_punct(p) {
            Ok(self.advance().span)
        } else {
            Err(syntax(self.span(), format!("expected `{p}`, found {}", describe(self.peek()))))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.advance().span)
        } else {
            Err(syntax(self.span(), format!("expected `{kw}`, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(w) => {
                let span = self.advance().span;
                Ok((w, span))
            }
            other => Err(syntax(self.span(), format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let (mut name, _) = self.ident()?;
        while self.is_punct(".") {
            self.advance();
            let (part, _) = self.ident()?;
            name.push('.');
            name.push_str(&part);
        }
        Ok(name)
    }

    fn namespace(&mut self) -> PResult<Namespace> {
        self.expect_kw("namespace")?;
        let name = self.qualified_name()?;
        self.expect_punct("{")?;
        let mut opens = Vec::new();
        let mut decls = Vec::new();
        let mut entry_attr = false;
        loop {
            if self.eat_punct("}") {
                break;
            }
            if matches!(self.peek(), Tok::Eof) {
                return Err(syntax(self.span(), "unterminated namespace"));
            }
            if self.eat_kw("open") {
                opens.push(self.qualified_name()?);
                self.expect_punct(";")?;
            } else if self.is_punct("@") {
                let (attr, _) = self.attribute()?;
                if attr == "EntryPoint" {
                    entry_attr = true;
                }
            } else if self.is_kw("internal") || self.is_kw("private") {
                self.advance();
            } else if self.is_kw("operation") {
                let mut decl = self.operation()?;
                decl.is_entry = entry_attr;
                entry_attr = false;
                decls.push(decl);
            } else if self.is_kw("function") {
                let span = self.span();
                self.skip_function()?;
                entry_attr = false;
                self.diags.push(Diagnostic::warning(span, "classical function declaration ignored"));
            } else if self.is_kw("newtype") || self.is_kw("struct") {
                return Err(unsupported(self.span(), "user-defined types"));
            } else {
                return Err(syntax(self.span(), format!("expected declaration, found {}", describe(self.peek()))));
            }
        }
        if !matches!(self.peek(), Tok::Eof) {
            return Err(syntax(self.span(), "exactly one namespace per file is supported"));
        }
        Ok(Namespace { name, opens, decls })
    }

    fn attribute(&mut self) -> PResult<(String, Span)> {
        self.expect_punct("@")?;
        let (name, span) = self.ident()?;
        if self.eat_punct("(") {
            let mut depth = 1;
            while depth > 0 {
                match self.advance().tok {
                    Tok::Punct("(") => depth += 1,
                    Tok::Punct(")") => depth -= 1,
                    Tok::Eof => return Err(syntax(span, "unterminated attribute")),
                    _ => {}
                }
            }
        }
        Ok((name, span))
    }

    fn skip_function(&mut self) -> PResult<()> {
        let start = self.span();
        while !self.is_punct("{") {
            if matches!(self.peek(), Tok::Eof) {
                return Err(syntax(start, "unterminated function declaration"));
            }
            self.advance();
        }
        self.skip_balanced_braces()
    }

    fn skip_balanced_braces(&mut self) -> PResult<()> {
        let start = self.expect_punct("{")?;
        let mut depth = 1;
        while depth > 0 {
            match self.advance().tok {
                Tok::Punct("{") => depth += 1,
                Tok::Punct("}") => depth -= 1,
                Tok::Eof => return Err(syntax(start, "unbalanced braces")),
                _ => {}
            }
        }
        Ok(())
    }

    fn operation(&mut self) -> PResult<OperationDecl> {
        let span = self.expect_kw("operation")?;
        let (name, _) = self.ident()?;
        if self.is_punct("<") || self.is_punct("'") {
            return Err(unsupported(self.span(), "generic operations"));
        }
        self.expect_punct("(")?;
        let mut params: Vec<Param> = Vec::new();
        if !self.is_punct(")") {
            loop {
                let (pname, pspan) = self.ident()?;
                self.expect_punct(":")?;
                let kind = self.param_type()?;
                if params.iter().any(|p| p.name == pname) {
                    return Err(Diagnostic::error(pspan, ErrorKind::DuplicateParameter(pname)));
                }
                params.push(Param { name: pname, kind, span: pspan });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.expect_punct(":")?;
        self.return_type()?;
        let mut characteristics = Characteristics::default();
        if self.eat_kw("is") {
            let paren = self.eat_punct("(");
            loop {
                let (c, cspan) = self.ident()?;
                match c.as_str() {
                    "Adj" => characteristics.adj = true,
                    "Ctl" => characteristics.ctl = true,
                    other => return Err(syntax(cspan, format!("unknown characteristic `{other}`"))),
                }
                if !(self.eat_punct("+") || self.eat_punct("*")) {
                    break;
                }
            }
            if paren {
                self.expect_punct(")")?;
            }
        }
        let body = self.operation_body()?;
        Ok(OperationDecl { name, params, characteristics, body, is_entry: false, span })
    }

    fn param_type(&mut self) -> PResult<ParamKind> {
        let (ty, span) = match self.peek() {
            Tok::Punct("(") => return Err(unsupported(self.span(), "tuple-typed parameters")),
            Tok::Punct("'") => return Err(unsupported(self.span(), "generic type parameters")),
            _ => self.ident()?,
        };
        let mut dims = 0;
        while self.is_punct("[") {
            self.advance();
            self.expect_punct("]")?;
            dims += 1;
        }
        match (ty.as_str(), dims) {
            ("Qubit", 0) => Ok(ParamKind::Qubit),
            ("Qubit", 1) => Ok(ParamKind::QubitArray(None)),
            ("Int", 0) => Ok(ParamKind::Int),
            ("Double", 0) => Ok(ParamKind::Double),
            ("Bool", 0) => Ok(ParamKind::Bool),
            _ => Err(unsupported(span, format!("parameter type `{ty}{}`", "[]".repeat(dims)))),
        }
    }

    fn return_type(&mut self) -> PResult<()> {
        if self.eat_punct("(") {
            let mut depth = 1;
            while depth > 0 {
                match self.advance().tok {
                    Tok::Punct("(") => depth += 1,
                    Tok::Punct(")") => depth -= 1,
                    Tok::Eof => return Err(syntax(self.span(), "unterminated return type")),
                    _ => {}
                }
            }
        } else {
            self.ident()?;
        }
        while self.is_punct("[") {
            self.advance();
            self.expect_punct("]")?;
        }
        Ok(())
    }

    fn is_specialization_start(&self) -> bool {
        let head = matches!(self.peek(), Tok::Ident(w) if w == "body" || w == "adjoint" || w == "controlled");
        let next_ok = match self.peek_at(1) {
            Tok::Punct("(") => true,
            Tok::Ident(w) => matches!(w.as_str(), "auto" | "self" | "invert" | "distribute" | "intrinsic" | "adjoint"),
            _ => false,
        };
        head && next_ok
    }

    fn operation_body(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        if !self.is_specialization_start() {
            return self.stmts_until_close();
        }
        let mut body = None;
        while !self.eat_punct("}") {
            let (kind, span) = self.ident()?;
            let mut kind = kind;
            if kind == "controlled" && self.is_kw("adjoint") {
                self.advance();
                kind = "controlled adjoint".into();
            }
            if self.is_punct("(") {
                self.advance();
                while !self.eat_punct(")") {
                    if matches!(self.peek(), Tok::Eof) {
                        return Err(syntax(span, "unterminated specialization"));
                    }
                    self.advance();
                }
                if kind != "body" {
                    return Err(unsupported(span, format!("explicit `{kind}` specialization")));
                }
                self.expect_punct("{")?;
                body = Some(self.stmts_until_close()?);
            } else {
                let (generator, gspan) = self.ident()?;
                if generator == "intrinsic" {
                    return Err(unsupported(gspan, "intrinsic operations"));
                }
                self.expect_punct(";")?;
            }
        }
        body.ok_or_else(|| syntax(self.prev_span(), "operation has no body specialization"))
    }

    fn stmts_until_close(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            if self.eat_punct("}") {
                return Ok(out);
            }
            if matches!(self.peek(), Tok::Eof) {
                return Err(syntax(self.span(), "expected `}`"));
            }
            if let Some(s) = self.stmt()? {
                out.push(s);
            }
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        self.stmts_until_close()
    }

    /// Indentation-delimited block after `:` (the `if a==1:` surface form).
    /// Holds every following statement that starts to the right of `column`.
    fn indented_block(&mut self, column: u32, colon_line: u32) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            let t = &self.toks[self.pos];
            if matches!(t.tok, Tok::Eof | Tok::Punct("}")) {
                break;
            }
            if t.span.line != colon_line && t.span.col <= column {
                break;
            }
            if let Some(s) = self.stmt()? {
                out.push(s);
            }
        }
        if out.is_empty() {
            return Err(syntax(self.span(), "expected an indented block"));
        }
        Ok(out)
    }

    fn end_stmt(&mut self) {
        self.eat_punct(";");
    }

    fn check_measurement(&mut self, e: &Expr) {
        let mut found = Vec::new();
        e.walk(&mut |x| {
            if let ExprKind::Call { callee, .. } = &x.kind {
                if MEASUREMENTS.contains(&callee.as_str()) {
                    found.push((x.span, format!("measurement `{callee}`")));
                } else if RESETS.contains(&callee.as_str()) {
                    found.push((x.span, format!("non-unitary `{callee}`")));
                }
            }
        });
        for (span, what) in found {
            self.diags.push(Diagnostic::error(span, ErrorKind::UnsupportedStatement(what)));
        }
    }

    fn stmt(&mut self) -> PResult<Option<Stmt>> {
        let span = self.span();
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            Tok::Punct(";") => {
                self.advance();
                return Ok(None);
            }
            Tok::Punct("(") => return Err(unsupported(span, "parenthesized callable expressions")),
            other => return Err(syntax(span, format!("expected statement, found {}", describe(other)))),
        };
        let kind = match word.as_str() {
            "use" | "borrow" | "using" | "borrowing" => {
                if word != "use" {
                    return Err(unsupported(span, format!("`{word}` statements")));
                }
                self.advance();
                let (name, _) = match self.peek() {
                    Tok::Punct("(") => return Err(unsupported(self.span(), "tuple qubit allocation")),
                    _ => self.ident()?,
                };
                self.expect_punct("=")?;
                self.expect_kw("Qubit")?;
                let size = if self.eat_punct("(") {
                    self.expect_punct(")")?;
                    None
                } else {
                    self.expect_punct("[")?;
                    let e = self.expr()?;
                    self.expect_punct("]")?;
                    Some(e)
                };
                if self.is_punct("{") {
                    return Err(unsupported(self.span(), "block-scoped `use` statements"));
                }
                self.end_stmt();
                StmtKind::QubitAlloc { name, size }
            }
            "let" => {
                self.advance();
                if self.is_punct("(") {
                    return Err(unsupported(self.span(), "tuple destructuring"));
                }
                let (name, _) = self.ident()?;
                if self.eat_punct(":") {
                    self.param_type()?;
                }
                self.expect_punct("=")?;
                let value = self.expr()?;
                self.check_measurement(&value);
                self.end_stmt();
                StmtKind::Let { name, value }
            }
            "mutable" | "set" => {
                self.advance();
                // mutable x = e;  set x = e;  set x += e;  set x w/= i <- e;
                while !self.is_punct("=") {
                    if matches!(self.peek(), Tok::Eof | Tok::Punct(";") | Tok::Punct("}")) {
                        return Err(syntax(self.span(), "expected `=`"));
                    }
                    self.advance();
                }
                self.advance();
                let value = self.expr()?;
                self.check_measurement(&value);
                if self.eat_punct("<-") {
                    let v = self.expr()?;
                    self.check_measurement(&v);
                }
                self.end_stmt();
                self.diags.push(Diagnostic::warning(span, format!("classical `{word}` statement ignored")));
                return Ok(None);
            }
            "while" => {
                self.advance();
                let cond = self.expr()?;
                self.check_measurement(&cond);
                let body = self.block()?;
                self.end_stmt();
                let msg = if body.is_empty() {
                    "`while` loop ignored".to_string()
                } else {
                    format!("`while` loop ignored ({} statement(s) in its body are not analyzed)", body.len())
                };
                self.diags.push(Diagnostic::warning(span, msg));
                return Ok(None);
            }
            "fail" | "return" => {
                self.advance();
                if !self.is_punct(";") && !self.is_punct("}") {
                    let e = self.expr()?;
                    self.check_measurement(&e);
                }
                self.end_stmt();
                self.diags.push(Diagnostic::warning(span, format!("`{word}` statement ignored")));
                return Ok(None);
            }
            "operation" | "function" => {
                return Err(unsupported(span, "nested callable declarations"));
            }
            "if" => self.if_stmt()?,
            "for" => {
                self.advance();
                let paren = self.is_punct("(")
                    && matches!(self.peek_at(1), Tok::Ident(_))
                    && matches!(self.peek_at(2), Tok::Ident(w) if w == "in");
                if paren {
                    self.advance();
                }
                if self.is_punct("(") {
                    return Err(unsupported(self.span(), "tuple loop variables"));
                }
                let (var, _) = self.ident()?;
                self.expect_kw("in")?;
                let iterable = self.expr()?;
                if paren {
                    self.expect_punct(")")?;
                }
                let body = self.block()?;
                self.end_stmt();
                StmtKind::For { var, iterable, body }
            }
            "within" => {
                self.advance();
                let within = self.block()?;
                self.expect_kw("apply")?;
                let apply = self.block()?;
                self.end_stmt();
                StmtKind::Conjugation { within, apply }
            }
            "repeat" => {
                self.advance();
                let body = self.block()?;
                self.expect_kw("until")?;
                let until = self.expr()?;
                self.check_measurement(&until);
                let fixup = if self.eat_kw("fixup") { Some(self.block()?) } else { None };
                self.end_stmt();
                StmtKind::Repeat { body, until, fixup }
            }
            _ => {
                let call = self.call_stmt()?;
                self.end_stmt();
                StmtKind::Call(call)
            }
        };
        Ok(Some(Stmt { kind, span }))
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        let if_tok = self.advance();
        let column = if_tok.span.col;
        let cond = self.expr()?;
        self.check_measurement(&cond);
        let (then_body, python) = self.branch_body(column)?;
        let else_body =
            if self.is_kw("elif") || (self.is_kw("else") && matches!(self.peek_at(1), Tok::Ident(w) if w == "if")) {
                if self.is_kw("else") {
                    self.advance();
                }
                let span = self.span();
                let nested = self.if_stmt()?;
                Some(vec![Stmt { kind: nested, span }])
            } else if self.is_kw("else") && (!python || self.span().col == column) {
                self.advance();
                let (b, _) = self.branch_body(column)?;
                Some(b)
            } else {
                None
            };
        if !python {
            self.end_stmt();
        }
        Ok(StmtKind::If { cond, then_body, else_body })
    }

    fn branch_body(&mut self, column: u32) -> PResult<(Vec<Stmt>, bool)> {
        if self.is_punct(":") {
            let colon = self.advance();
            Ok((self.indented_block(column, colon.span.line)?, true))
        } else {
            Ok((self.block()?, false))
        }
    }

    fn call_stmt(&mut self) -> PResult<CallExpr> {
        let span = self.span();
        let mut functors = Vec::new();
        loop {
            if self.is_kw("Adjoint") {
                self.advance();
                functors.push(FunctorKw::Adjoint);
            } else if self.is_kw("Controlled") {
                self.advance();
                functors.push(FunctorKw::Controlled);
            } else {
                break;
            }
        }
        let (callee, cspan) = self.ident()?;
        if !self.is_punct("(") {
            return Err(syntax(self.span(), format!("expected `(` after `{callee}`")));
        }
        let args = self.call_args()?;
        let call = CallExpr { functors, callee, args, span };
        let as_expr = Expr::new(ExprKind::Call { callee: call.callee.clone(), args: call.args.clone() }, cspan);
        self.check_measurement(&as_expr);
        Ok(call)
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let start = self.or_expr()?;
        if self.is_punct("..") {
            let span = start.span;
            self.advance();
            let second = self.or_expr()?;
            if self.eat_punct("..") {
                let end = self.or_expr()?;
                return Ok(Expr::new(
                    ExprKind::Range { start: Box::new(start), step: Some(Box::new(second)), end: Box::new(end) },
                    span,
                ));
            }
            return Ok(Expr::new(ExprKind::Range { start: Box::new(start), step: None, end: Box::new(second) }, span));
        }
        if self.is_punct("->") || self.is_punct("=>") {
            return Err(unsupported(self.span(), "lambda expressions"));
        }
        Ok(start)
    }

    fn binary_level(&mut self, level: u8) -> PResult<Expr> {
        if level > 6 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Ident(w) if w == "or" => Some(BinOp::Or),
                Tok::Ident(w) if w == "and" => Some(BinOp::And),
                Tok::Punct(p) => match *p {
                    "||" => Some(BinOp::Or),
                    "&&" => Some(BinOp::And),
                    "==" => Some(BinOp::Eq),
                    "!=" => Some(BinOp::Ne),
                    "<" => Some(BinOp::Lt),
                    "<=" => Some(BinOp::Le),
                    ">" => Some(BinOp::Gt),
                    ">=" => Some(BinOp::Ge),
                    "+" => Some(BinOp::Add),
                    "-" => Some(BinOp::Sub),
                    "*" => Some(BinOp::Mul),
                    "/" => Some(BinOp::Div),
                    "%" => Some(BinOp::Mod),
                    _ => None,
                },
                _ => None,
            };
            match op {
                Some(op) if op.precedence() == level => {
                    self.advance();
                    let rhs = self.binary_level(level + 1)?;
                    let span = lhs.span;
                    lhs = Expr::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.binary_level(1)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_punct("-") {
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary { op: UnOp::Neg, expr: Box::new(e) }, span));
        }
        if self.eat_punct("+") {
            return self.unary();
        }
        if self.eat_punct("!") || self.eat_kw("not") {
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary { op: UnOp::Not, expr: Box::new(e) }, span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.is_punct("[") {
            self.advance();
            let index = self.expr()?;
            self.expect_punct("]")?;
            let span = e.span;
            e = Expr::new(ExprKind::Index { base: Box::new(e), index: Box::new(index) }, span);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::new(ExprKind::Int(v), span))
            }
            Tok::Double(t) => {
                self.advance();
                Ok(Expr::new(ExprKind::Double(t), span))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::new(ExprKind::Str(s), span))
            }
            Tok::Ident(w) => {
                self.advance();
                match w.as_str() {
                    "true" => return Ok(Expr::new(ExprKind::Bool(true), span)),
                    "false" => return Ok(Expr::new(ExprKind::Bool(false), span)),
                    "Adjoint" | "Controlled" => {
                        return Err(unsupported(span, "functor application inside expressions"))
                    }
                    "new" => return Err(unsupported(span, "`new` array expressions")),
                    _ => {}
                }
                if self.is_punct("(") {
                    let args = self.call_args()?;
                    Ok(Expr::new(ExprKind::Call { callee: w, args }, span))
                } else {
                    Ok(Expr::new(ExprKind::Ident(w), span))
                }
            }
            Tok::Punct("(") => {
                self.advance();
                if self.eat_punct(")") {
                    return Ok(Expr::new(ExprKind::Tuple(vec![]), span));
                }
                let first = self.expr()?;
                if self.eat_punct(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_punct(",") {
                    items.push(self.expr()?);
                }
                self.expect_punct(")")?;
                Ok(Expr::new(ExprKind::Tuple(items), span))
            }
            Tok::Punct("[") => {
                self.advance();
                let mut items = Vec::new();
                if !self.is_punct("]") {
                    loop {
                        items.push(self.expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct("]")?;
                Ok(Expr::new(ExprKind::Array(items), span))
            }
            Tok::Punct("_") => Err(unsupported(span, "partial application")),
            other => Err(syntax(span, format!("expected expression, found {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(w) => format!("`{w}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Double(d) => format!("`{d}`"),
        Tok::Str(_) => "string literal".into(),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of file".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<Parsed, Diagnostics> {
        parse_str(src)
    }

    #[test]
    fn empty_namespace() {
        let p = parse("namespace N {}").unwrap();
        assert!(p.namespace.decls.is_empty());
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn measurement_is_an_error() {
        let src = "namespace N { operation A() : Unit { use q = Qubit(); let r = M(q); } }";
        let err = parse(src).unwrap_err();
        assert!(err.has_kind(|k| k.is_measurement()));
        let d = err.errors().next().unwrap();
        assert_eq!(d.span.line, 1);
    }

    #[test]
    fn bare_measurement_call_is_an_error() {
        let src = "namespace N { operation A() : Unit { use q = Qubit(); M(q); } }";
        assert!(parse(src).unwrap_err().has_kind(|k| k.is_measurement()));
    }

    #[test]
    fn ignored_statements_warn() {
        let src = "namespace N { operation A() : Unit { mutable x = 0; set x += 1; while x < 3 { } H(q); } }";
        let p = parse(src).unwrap();
        assert_eq!(p.warnings.len(), 3);
        assert_eq!(p.namespace.decls[0].body.len(), 1);
    }

    #[test]
    fn unsupported_constructs() {
        for src in [
            "namespace N { newtype P = Int; }",
            "namespace N { operation A<'T>() : Unit { } }",
            "namespace N { operation A() : Unit { let f = x -> x; } }",
            "namespace N { operation A() : Unit { operation B() : Unit {} } }",
            "namespace N { operation A() : Unit { H(_); } }",
        ] {
            let e = parse(src).unwrap_err();
            assert!(e.has_kind(|k| matches!(k, ErrorKind::Unsupported(_))), "{src}: {e}");
        }
    }

    #[test]
    fn syntax_error_position() {
        let e = parse("namespace N {\n operation A() : Unit {\n  H(q;\n }\n}").unwrap_err();
        let d = e.errors().next().unwrap();
        assert!(matches!(d.kind, ErrorKind::Syntax(_)));
        assert_eq!(d.span.line, 3);
    }

    #[test]
    fn python_style_if_blocks() {
        let src = "namespace N {\n operation A(a : Int) : Unit {\n  use q = Qubit();\n  if a==1:\n      H(q);\n      X(q);\n  H(q)\n }\n}";
        let p = parse(src).unwrap();
        let body = &p.namespace.decls[0].body;
        assert_eq!(body.len(), 3);
        match &body[1].kind {
            StmtKind::If { then_body, else_body, .. } => {
                assert_eq!(then_body.len(), 2);
                assert!(else_body.is_none());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn specializations() {
        let src = "namespace N { operation A(q : Qubit) : Unit is Adj + Ctl { body (...) { H(q); } adjoint self; controlled auto; } }";
        let p = parse(src).unwrap();
        let d = &p.namespace.decls[0];
        assert!(d.characteristics.adj && d.characteristics.ctl);
        assert_eq!(d.body.len(), 1);
        let src =
            "namespace N { operation A(q : Qubit) : Unit is Adj { body (...) { H(q); } adjoint (...) { H(q); } } }";
        assert!(parse(src).is_err());
    }
}
