//! Canonical pretty-printer: one statement per line, two-space indent,
//! minimal parentheses. Instrumentation forms print with the reserved
//! `__nondet`, `__assert`, `__exit` and `__cover` spellings.

use std::fmt::Write;

use super::ast::*;

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn is_primary(e: &Expr) -> bool {
    match e {
        Expr::Int(v) => *v >= 0,
        Expr::Bool(_) | Expr::Var(_) | Expr::Index(..) | Expr::PostInc(_) | Expr::PostDec(_) => true,
        Expr::Unary(UnOp::Abs, _) => true,
        _ => false,
    }
}

fn write_expr(out: &mut String, e: &Expr, ctx_prec: u8) {
    match e {
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Var(n) => out.push_str(n),
        Expr::Index(n, i) => {
            out.push_str(n);
            out.push('[');
            write_expr(out, i, 0);
            out.push(']');
        }
        Expr::PostInc(n) => {
            out.push_str(n);
            out.push_str("++");
        }
        Expr::PostDec(n) => {
            out.push_str(n);
            out.push_str("--");
        }
        Expr::Unary(UnOp::Abs, inner) => {
            out.push_str("abs(");
            write_expr(out, inner, 0);
            out.push(')');
        }
        Expr::Unary(op, inner) => {
            out.push(if *op == UnOp::Neg { '-' } else { '!' });
            if is_primary(inner) && !matches!(**inner, Expr::Int(_)) {
                write_expr(out, inner, 0);
            } else if let (UnOp::Not, Expr::Int(_)) = (op, inner.as_ref()) {
                write_expr(out, inner, 0);
            } else {
                out.push('(');
                write_expr(out, inner, 0);
                out.push(')');
            }
        }
        Expr::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < ctx_prec;
            if paren {
                out.push('(');
            }
            write_expr(out, l, prec);
            let _ = write!(out, " {} ", op.symbol());
            // Left-associative: an equal-precedence right operand needs parens.
            write_expr(out, r, prec + 1);
            if paren {
                out.push(')');
            }
        }
    }
}

pub fn lvalue_to_string(lv: &Lvalue) -> String {
    match lv {
        Lvalue::Var(n) => n.clone(),
        Lvalue::Index(n, i) => format!("{n}[{}]", expr_to_string(i)),
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Decl { name, init } => {
            let _ = writeln!(out, "let {name} = {};", expr_to_string(init));
        }
        StmtKind::ArrayDecl { name, size } => {
            let _ = writeln!(out, "let {name}[{size}];");
        }
        StmtKind::Assign { lhs, rhs } => {
            let _ = writeln!(out, "{} = {};", lvalue_to_string(lhs), expr_to_string(rhs));
        }
        StmtKind::If { cond, then_block, else_block } => {
            let _ = writeln!(out, "if ({}) {{", expr_to_string(cond));
            write_block(out, then_block, depth + 1);
            indent(out, depth);
            if else_block.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                write_block(out, else_block, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", expr_to_string(cond));
            write_block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Return(e) => {
            let _ = writeln!(out, "return {};", expr_to_string(e));
        }
        StmtKind::LabelPragma(p) => {
            let _ = writeln!(out, "//@label {}", expr_to_string(p));
        }
        StmtKind::Guard { label, pred, body } => {
            if body.is_empty() {
                let _ = writeln!(out, "if ({}) {{}} // {label}", expr_to_string(pred));
            } else {
                let _ = writeln!(out, "if ({}) {{ // {label}", expr_to_string(pred));
                write_block(out, body, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::NondetIf { label, body } => {
            let _ = writeln!(out, "if (__nondet) {{ // {label}");
            write_block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Assert(e) => {
            let _ = writeln!(out, "__assert({});", expr_to_string(e));
        }
        StmtKind::Exit(_) => out.push_str("__exit;\n"),
        StmtKind::CoverHook(label) => {
            let _ = writeln!(out, "__cover({});", label.0);
        }
    }
}

fn write_param(out: &mut String, p: &Param) {
    match p.ty {
        ParamType::Int => {
            let _ = write!(out, "{}: int in {}", p.name, p.domain);
        }
        ParamType::Array(n) => {
            let _ = write!(out, "{}: int[{n}] in {}", p.name, p.domain);
        }
    }
}

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    let _ = write!(out, "fn {}(", p.name);
    for (i, param) in p.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_param(&mut out, param);
    }
    out.push_str(") {\n");
    write_block(&mut out, &p.body, 1);
    out.push_str("}\n");
    out
}
