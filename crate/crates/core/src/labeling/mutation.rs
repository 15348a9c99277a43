//! Side-effect-free first-order mutation operators.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;

/// Mutation operators, in generation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationOperator {
    /// Arithmetic operator replacement.
    Aor,
    /// Relational operator replacement.
    Ror,
    /// Conditional operator replacement (`&&` / `||`).
    Cor,
    /// Absolute value insertion.
    Abs,
    /// Logical negation insertion before a relational atom.
    UoiNeg,
    /// Arithmetic unary minus insertion before a read.
    Aoiu,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 6] = [
        MutationOperator::Aor,
        MutationOperator::Ror,
        MutationOperator::Cor,
        MutationOperator::Abs,
        MutationOperator::UoiNeg,
        MutationOperator::Aoiu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::Aor => "aor",
            MutationOperator::Ror => "ror",
            MutationOperator::Cor => "cor",
            MutationOperator::Abs => "abs",
            MutationOperator::UoiNeg => "uoi-neg",
            MutationOperator::Aoiu => "aoiu",
        }
    }

    /// Replacements of `e` at its root, in replacement order.
    fn replacements(self, e: &Expr) -> Vec<Expr> {
        match (self, e) {
            (MutationOperator::Aor, Expr::Binary(op, l, r)) if op.is_arithmetic() => BinOp::ARITHMETIC
                .iter()
                .filter(|o| *o != op)
                .map(|o| Expr::Binary(*o, l.clone(), r.clone()))
                .collect(),
            (MutationOperator::Ror, Expr::Binary(op, l, r)) if op.is_relational() => BinOp::RELATIONAL
                .iter()
                .filter(|o| *o != op)
                .map(|o| Expr::Binary(*o, l.clone(), r.clone()))
                .collect(),
            (MutationOperator::Cor, Expr::Binary(BinOp::And, l, r)) => vec![Expr::Binary(BinOp::Or, l.clone(), r.clone())],
            (MutationOperator::Cor, Expr::Binary(BinOp::Or, l, r)) => vec![Expr::Binary(BinOp::And, l.clone(), r.clone())],
            (MutationOperator::Abs, _) if is_integer_subexpr(e) => vec![Expr::unary(UnOp::Abs, e.clone())],
            (MutationOperator::UoiNeg, Expr::Binary(op, _, _)) if op.is_relational() => {
                vec![Expr::unary(UnOp::Not, e.clone())]
            }
            (MutationOperator::Aoiu, Expr::Var(_) | Expr::Index(..)) => vec![Expr::unary(UnOp::Neg, e.clone())],
            _ => vec![],
        }
    }
}

/// Integer-valued, non-literal subexpressions that `abs` may wrap.
fn is_integer_subexpr(e: &Expr) -> bool {
    match e {
        Expr::Var(_) | Expr::Index(..) | Expr::Unary(UnOp::Neg, _) => true,
        Expr::Binary(op, _, _) => op.is_arithmetic(),
        _ => false,
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        MutationOperator::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown mutation operator `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MutationKind {
    /// Right-hand side of an assignment or declaration, or a returned value.
    ExprMut { old: Expr, new: Expr },
    /// Branching condition.
    CondMut { old: Expr, new: Expr },
    /// Target of an assignment.
    LhsMut { old: Lvalue, new: Lvalue },
}

/// An atomic mutant of `base`, differing at `loc` only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub id: u32,
    pub base: Arc<Program>,
    pub loc: LocationId,
    pub kind: MutationKind,
    pub operator: MutationOperator,
}

impl Mutant {
    /// The mutated program, with the same location ids as `base`.
    pub fn program(&self) -> Program {
        let mut p = (*self.base).clone();
        let stmt = p.stmt_mut(self.loc).expect("mutated location exists");
        match (&mut stmt.kind, &self.kind) {
            (StmtKind::Decl { init: slot, .. }, MutationKind::ExprMut { new, .. })
            | (StmtKind::Assign { rhs: slot, .. }, MutationKind::ExprMut { new, .. })
            | (StmtKind::Return(slot), MutationKind::ExprMut { new, .. })
            | (StmtKind::If { cond: slot, .. }, MutationKind::CondMut { new, .. })
            | (StmtKind::While { cond: slot, .. }, MutationKind::CondMut { new, .. }) => *slot = new.clone(),
            (StmtKind::Assign { lhs, .. }, MutationKind::LhsMut { new, .. }) => *lhs = new.clone(),
            _ => panic!("mutation kind does not match statement at {}", self.loc),
        }
        p
    }

    pub fn has_side_effects(&self) -> bool {
        match &self.kind {
            MutationKind::ExprMut { old, new } | MutationKind::CondMut { old, new } => {
                old.has_side_effects() || new.has_side_effects()
            }
            MutationKind::LhsMut { old, new } => old.as_expr().has_side_effects() || new.as_expr().has_side_effects(),
        }
    }
}

/// Every single-site mutant of `e` under `op`, sites in pre-order.
fn mutate_expr(e: &Expr, op: MutationOperator) -> Vec<Expr> {
    let mut out = op.replacements(e);
    match e {
        Expr::Index(n, idx) => {
            out.extend(mutate_expr(idx, op).into_iter().map(|i| Expr::Index(n.clone(), Box::new(i))));
        }
        Expr::Unary(u, inner) => {
            // Do not wrap an `abs` operand in a second `abs`.
            if !(op == MutationOperator::Abs && *u == UnOp::Abs) {
                out.extend(mutate_expr(inner, op).into_iter().map(|i| Expr::unary(*u, i)));
            } else {
                let inner_muts = mutate_expr(inner, op);
                let skip = usize::from(is_integer_subexpr(inner));
                out.extend(inner_muts.into_iter().skip(skip).map(|i| Expr::unary(*u, i)));
            }
        }
        Expr::Binary(b, l, r) => {
            out.extend(mutate_expr(l, op).into_iter().map(|m| Expr::Binary(*b, Box::new(m), r.clone())));
            out.extend(mutate_expr(r, op).into_iter().map(|m| Expr::Binary(*b, l.clone(), Box::new(m))));
        }
        _ => {}
    }
    out
}

/// Generates all mutants of `p` for the operators in `ops`, ordered by
/// location, operator, site (pre-order, assignment target before value)
/// and replacement. Statements containing side effects are not mutated.
pub fn generate_mutants(p: &Program, ops: &[MutationOperator]) -> Vec<Mutant> {
    let base = Arc::new(p.clone());
    let mut ops = ops.to_vec();
    ops.sort();
    ops.dedup();
    let mut out = Vec::new();
    for stmt in p.statements() {
        for &op in &ops {
            let kinds: Vec<MutationKind> = match &stmt.kind {
                StmtKind::Decl { init, .. } | StmtKind::Return(init) if !init.has_side_effects() => mutate_expr(init, op)
                    .into_iter()
                    .map(|new| MutationKind::ExprMut { old: init.clone(), new })
                    .collect(),
                StmtKind::Assign { lhs, rhs } if !rhs.has_side_effects() && !lhs.as_expr().has_side_effects() => {
                    let mut kinds = Vec::new();
                    if let Lvalue::Index(name, idx) = lhs {
                        kinds.extend(mutate_expr(idx, op).into_iter().map(|i| MutationKind::LhsMut {
                            old: lhs.clone(),
                            new: Lvalue::Index(name.clone(), i),
                        }));
                    }
                    kinds.extend(mutate_expr(rhs, op).into_iter().map(|new| MutationKind::ExprMut { old: rhs.clone(), new }));
                    kinds
                }
                StmtKind::If { cond, .. } | StmtKind::While { cond, .. } if !cond.has_side_effects() => {
                    mutate_expr(cond, op).into_iter().map(|new| MutationKind::CondMut { old: cond.clone(), new }).collect()
                }
                _ => vec![],
            };
            for kind in kinds {
                out.push(Mutant { id: out.len() as u32, base: base.clone(), loc: stmt.loc, kind, operator: op });
            }
        }
    }
    out
}
