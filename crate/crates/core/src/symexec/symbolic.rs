//! Symbolic stores and expression evaluation.
//!
//! Evaluation returns the value term together with side conditions: the
//! constraints under which evaluation does not trap. Under `&&`/`||`, side
//! conditions of the right operand only apply when it is evaluated.

use std::collections::BTreeMap;

use crate::frontend::ast::*;
use crate::semantics::IntWidth;
use crate::solver::{Term, VarTable};

#[derive(Debug, Clone, Default)]
pub struct SymStore {
    pub scalars: BTreeMap<String, Term>,
    pub arrays: BTreeMap<String, Vec<Term>>,
}

impl SymStore {
    /// Inputs bound to their symbolic variables.
    pub fn initial(p: &Program, table: &VarTable) -> Self {
        let mut s = SymStore::default();
        for param in &p.params {
            match param.ty {
                ParamType::Int => {
                    s.scalars.insert(param.name.clone(), Term::var(table.scalar(&param.name).expect("param var")));
                }
                ParamType::Array(_) => {
                    let cells = table.cells(&param.name).expect("param cells").into_iter().map(Term::var).collect();
                    s.arrays.insert(param.name.clone(), cells);
                }
            }
        }
        s
    }
}

/// Evaluates expressions over a symbolic store.
pub struct Evaluator<'a> {
    pub store: &'a mut SymStore,
    pub w: IntWidth,
}

impl Evaluator<'_> {
    fn index_ok(&self, i: &Term, n: usize) -> Term {
        let w = self.w;
        Term::and(
            Term::binary(BinOp::Ge, i.clone(), Term::constant(0), w),
            Term::binary(BinOp::Lt, i.clone(), Term::constant(n as i64), w),
            w,
        )
    }

    /// Reads `name[i]`, pushing the in-bounds condition.
    pub fn read_cell(&self, name: &str, i: &Term, sides: &mut Vec<Term>) -> Term {
        let cells = &self.store.arrays[name];
        let n = cells.len();
        if let Some(c) = i.as_const() {
            if c >= 0 && (c as usize) < n {
                return cells[c as usize].clone();
            }
            sides.push(Term::truth(false));
            return Term::constant(0);
        }
        sides.push(self.index_ok(i, n));
        if n == 0 {
            return Term::constant(0);
        }
        let mut acc = cells[n - 1].clone();
        for j in (0..n - 1).rev() {
            let hit = Term::binary(BinOp::Eq, i.clone(), Term::constant(j as i64), self.w);
            acc = Term::ite(hit, cells[j].clone(), acc);
        }
        acc
    }

    /// Writes `name[i] = v`, pushing the in-bounds condition.
    pub fn write_cell(&mut self, name: &str, i: &Term, v: Term, sides: &mut Vec<Term>) {
        let w = self.w;
        let n = self.store.arrays[name].len();
        if let Some(c) = i.as_const() {
            if c >= 0 && (c as usize) < n {
                self.store.arrays.get_mut(name).unwrap()[c as usize] = v;
            } else {
                sides.push(Term::truth(false));
            }
            return;
        }
        sides.push(self.index_ok(i, n));
        let cells = self.store.arrays.get_mut(name).unwrap();
        for (j, cell) in cells.iter_mut().enumerate() {
            let hit = Term::binary(BinOp::Eq, i.clone(), Term::constant(j as i64), w);
            *cell = Term::ite(hit, v.clone(), cell.clone());
        }
    }

    pub fn eval(&mut self, e: &Expr, sides: &mut Vec<Term>) -> Term {
        let w = self.w;
        match e {
            Expr::Int(v) => Term::constant(w.wrap(*v)),
            Expr::Bool(b) => Term::truth(*b),
            Expr::Var(n) => self.store.scalars[n].clone(),
            Expr::Index(n, idx) => {
                let i = self.eval(idx, sides);
                self.read_cell(n, &i, sides)
            }
            Expr::Unary(op, inner) => {
                let v = self.eval(inner, sides);
                Term::unary(*op, v, w)
            }
            Expr::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                let lv = self.eval(l, sides);
                let mut rsides = Vec::new();
                let rv = self.eval(r, &mut rsides);
                let skip = if *op == BinOp::And { Term::not(lv.clone(), w) } else { lv.clone() };
                for s in rsides {
                    sides.push(Term::or(skip.clone(), s, w));
                }
                Term::binary(*op, lv, rv, w)
            }
            Expr::Binary(op, l, r) => {
                let lv = self.eval(l, sides);
                let rv = self.eval(r, sides);
                if matches!(op, BinOp::Div | BinOp::Rem) {
                    sides.push(Term::binary(BinOp::Ne, rv.clone(), Term::constant(0), w));
                }
                Term::binary(*op, lv, rv, w)
            }
            Expr::PostInc(n) | Expr::PostDec(n) => {
                let old = self.store.scalars[n].clone();
                let delta = if matches!(e, Expr::PostInc(_)) { 1 } else { -1 };
                let new = Term::binary(BinOp::Add, old.clone(), Term::constant(delta), w);
                self.store.scalars.insert(n.clone(), new);
                old
            }
        }
    }
}

/// Conjunction of side conditions.
pub fn all(sides: Vec<Term>, w: IntWidth) -> Term {
    sides.into_iter().fold(Term::truth(true), |acc, s| Term::and(acc, s, w))
}

/// The term that holds exactly when a label predicate is satisfied: it
/// evaluates without trapping and is truthy.
pub fn predicate_term(pred: &Expr, store: &SymStore, w: IntWidth) -> Term {
    let mut scratch = store.clone();
    let mut sides = Vec::new();
    let v = Evaluator { store: &mut scratch, w }.eval(pred, &mut sides);
    let truthy = if v.is_boolean() { v } else { Term::binary(BinOp::Ne, v, Term::constant(0), w) };
    Term::and(all(sides, w), truthy, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_expr};
    use crate::semantics::{eval_pure, truthy, Store};
    use crate::solver::Model;

    #[test]
    fn symbolic_matches_concrete_when_defined() {
        let p = parse("fn f(x: int in [-3, 3], i: int in [-1, 3], a: int[3] in [-2, 2]) { return 0; }").unwrap();
        let table = VarTable::from_program(&p);
        let store = SymStore::initial(&p, &table);
        let exprs = ["a[i] * x + 1", "x != 0 && 6 / x > a[0]", "i >= 0 && i < 3 && a[i] > 0 || x < 0", "abs(x - a[2]) % 2"];
        for src in exprs {
            let e = parse_expr(src, false).unwrap();
            let mut sides = Vec::new();
            let mut scratch = store.clone();
            let t = Evaluator { store: &mut scratch, w: p.width }.eval(&e, &mut sides);
            let guard = all(sides, p.width);
            for model in crate::domain::models(&table) {
                let m: Model = model;
                let conc = Store::from_input(&table.model_to_input(&m));
                let expected = eval_pure(&e, &conc, p.width);
                assert_eq!(guard.holds(&m, p.width), expected.is_ok(), "{src} at {m:?}");
                if let Ok(v) = expected {
                    if e.is_boolean() {
                        assert_eq!(truthy(t.eval(&m, p.width)), truthy(v));
                    } else {
                        assert_eq!(t.eval(&m, p.width), v, "{src} at {m:?}");
                    }
                }
            }
        }
    }
}
