//! Mini-language frontend: parsing, checking, normalization and printing.

pub mod ast;
pub mod check;
pub mod normalize;
pub mod parser;
pub mod printer;

use thiserror::Error;

pub use ast::{BinOp, Expr, LabelId, LocationId, Lvalue, Param, ParamType, Program, Stmt, StmtKind, UnOp};
pub use normalize::normalize;
pub use parser::{parse, parse_expr, parse_with, ParseOptions};
pub use printer::{expr_to_string, program_to_string};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("type error at line {line}: {message}")]
    Type { line: u32, message: String },
}

/// Maximal connective-free subexpressions of a side-effect-free condition,
/// left to right, duplicates kept. `&&`, `||`, `^` and `!` are connectives.
pub fn atomic_conditions(cond: &Expr) -> Vec<Expr> {
    fn go(e: &Expr, out: &mut Vec<Expr>) {
        match e {
            Expr::Binary(op, l, r) if op.is_connective() => {
                go(l, out);
                go(r, out);
            }
            Expr::Unary(UnOp::Not, inner) => go(inner, out),
            atom => out.push(atom.clone()),
        }
    }
    let mut out = Vec::new();
    go(cond, &mut out);
    out
}

/// Evaluates the boolean skeleton of `cond` with its atoms (in
/// [`atomic_conditions`] order) replaced by `atoms`.
pub fn eval_skeleton(cond: &Expr, atoms: &[bool]) -> bool {
    fn go(e: &Expr, atoms: &[bool], next: &mut usize) -> bool {
        match e {
            Expr::Binary(op, l, r) if op.is_connective() => {
                let a = go(l, atoms, next);
                let b = go(r, atoms, next);
                match op {
                    BinOp::And => a && b,
                    BinOp::Or => a || b,
                    _ => a != b,
                }
            }
            Expr::Unary(UnOp::Not, inner) => !go(inner, atoms, next),
            _ => {
                let v = atoms[*next];
                *next += 1;
                v
            }
        }
    }
    go(cond, atoms, &mut 0)
}
