//! Canonical pretty-printer. Output always uses brace syntax, so printing a
//! program written with indentation-style `if` blocks normalizes it.

use std::fmt::Write;

use super::ast::*;

pub fn print_namespace(ns: &Namespace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "namespace {} {{", ns.name);
    for o in &ns.opens {
        let _ = writeln!(out, "    open {o};");
    }
    for d in &ns.decls {
        out.push('\n');
        print_decl(&mut out, d, 1);
    }
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

pub fn print_decl(out: &mut String, d: &OperationDecl, level: usize) {
    if d.is_entry {
        indent(out, level);
        out.push_str("@EntryPoint()\n");
    }
    indent(out, level);
    let params: Vec<String> = d
        .params
        .iter()
        .map(|p| {
            let ty = match p.kind {
                ParamKind::Qubit => "Qubit",
                ParamKind::QubitArray(_) => "Qubit[]",
                ParamKind::Int => "Int",
                ParamKind::Double => "Double",
                ParamKind::Bool => "Bool",
            };
            format!("{} : {}", p.name, ty)
        })
        .collect();
    let _ = write!(out, "operation {}({}) : Unit", d.name, params.join(", "));
    match (d.characteristics.adj, d.characteristics.ctl) {
        (true, true) => out.push_str(" is Adj + Ctl"),
        (true, false) => out.push_str(" is Adj"),
        (false, true) => out.push_str(" is Ctl"),
        (false, false) => {}
    }
    out.push_str(" {\n");
    print_stmts(out, &d.body, level + 1);
    indent(out, level);
    out.push_str("}\n");
}

pub fn print_stmts(out: &mut String, stmts: &[Stmt], level: usize) {
    for s in stmts {
        print_stmt(out, s, level);
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], level: usize) {
    out.push_str("{\n");
    print_stmts(out, stmts, level + 1);
    indent(out, level);
    out.push('}');
}

pub fn print_stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::Call(c) => {
            out.push_str(&print_call(c));
            out.push_str(";\n");
        }
        StmtKind::QubitAlloc { name, size } => match size {
            None => {
                let _ = writeln!(out, "use {name} = Qubit();");
            }
            Some(e) => {
                let _ = writeln!(out, "use {name} = Qubit[{}];", print_expr(e));
            }
        },
        StmtKind::Let { name, value } => {
            let _ = writeln!(out, "let {name} = {};", print_expr(value));
        }
        StmtKind::For { var, iterable, body } => {
            let _ = write!(out, "for {var} in {} ", print_expr(iterable));
            print_block(out, body, level);
            out.push('\n');
        }
        StmtKind::If { cond, then_body, else_body } => {
            let _ = write!(out, "if {} ", print_expr(cond));
            print_block(out, then_body, level);
            if let Some(e) = else_body {
                out.push_str(" else ");
                print_block(out, e, level);
            }
            out.push('\n');
        }
        StmtKind::Conjugation { within, apply } => {
            out.push_str("within ");
            print_block(out, within, level);
            out.push_str(" apply ");
            print_block(out, apply, level);
            out.push('\n');
        }
        StmtKind::Repeat { body, until, fixup } => {
            out.push_str("repeat ");
            print_block(out, body, level);
            let _ = write!(out, " until {}", print_expr(until));
            match fixup {
                Some(f) => {
                    out.push_str(" fixup ");
                    print_block(out, f, level);
                    out.push('\n');
                }
                None => out.push_str(";\n"),
            }
        }
    }
}

pub fn print_call(c: &CallExpr) -> String {
    let mut s = String::new();
    for f in &c.functors {
        s.push_str(match f {
            FunctorKw::Adjoint => "Adjoint ",
            FunctorKw::Controlled => "Controlled ",
        });
    }
    let args: Vec<String> = c.args.iter().map(print_expr).collect();
    let _ = write!(s, "{}({})", c.callee, args.join(", "));
    s
}

pub fn print_expr(e: &Expr) -> String {
    expr_prec(e, 0)
}

// Precedence of the expression itself; 7 = atom, 6.5 ~ unary.
fn prec_of(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence() * 2,
        ExprKind::Range { .. } => 1,
        ExprKind::Unary { .. } => 13,
        _ => 14,
    }
}

fn expr_prec(e: &Expr, min: u8) -> String {
    let s = match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Double(t) => t.clone(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Str(s) => format!("\"{s}\""),
        ExprKind::Ident(n) => n.clone(),
        ExprKind::Call { callee, args } => {
            let a: Vec<String> = args.iter().map(print_expr).collect();
            format!("{callee}({})", a.join(", "))
        }
        ExprKind::Index { base, index } => format!("{}[{}]", expr_prec(base, 14), print_expr(index)),
        ExprKind::Array(items) => {
            let a: Vec<String> = items.iter().map(print_expr).collect();
            format!("[{}]", a.join(", "))
        }
        ExprKind::Tuple(items) => {
            let a: Vec<String> = items.iter().map(print_expr).collect();
            format!("({})", a.join(", "))
        }
        ExprKind::Range { start, step, end } => match step {
            Some(st) => format!("{}..{}..{}", expr_prec(start, 2), expr_prec(st, 2), expr_prec(end, 2)),
            None => format!("{}..{}", expr_prec(start, 2), expr_prec(end, 2)),
        },
        ExprKind::Unary { op, expr } => match op {
            UnOp::Neg => format!("-{}", expr_prec(expr, 13)),
            UnOp::Not => format!("not {}", expr_prec(expr, 13)),
        },
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence() * 2;
            format!("{} {} {}", expr_prec(lhs, p), op.symbol(), expr_prec(rhs, p + 1))
        }
    };
    if prec_of(e) < min {
        format!("({s})")
    } else {
        s
    }
}
