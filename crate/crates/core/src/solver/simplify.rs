//! Formula simplification: conjunction flattening, constant folding and
//! bound subsumption on `var <op> const` literals.

use std::collections::BTreeMap;

use crate::frontend::ast::BinOp;

use super::term::{Node, Term, VarId};
use super::Formula;

fn flatten(t: &Term, out: &mut Vec<Term>) {
    match t.node() {
        Node::Binary(BinOp::And, a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        _ => out.push(t.clone()),
    }
}

/// Reads a literal as `var ∈ [lo, hi]`.
fn as_bound(t: &Term) -> Option<(VarId, i64, i64)> {
    let Node::Binary(op, a, b) = t.node() else { return None };
    let (v, c, op) = match (a.node(), b.node()) {
        (Node::Var(v), Node::Const(c)) => (*v, *c, *op),
        (Node::Const(c), Node::Var(v)) => (
            *v,
            *c,
            match op {
                BinOp::Lt => BinOp::Gt,
                BinOp::Le => BinOp::Ge,
                BinOp::Gt => BinOp::Lt,
                BinOp::Ge => BinOp::Le,
                other => *other,
            },
        ),
        _ => return None,
    };
    let (lo, hi) = match op {
        BinOp::Lt => (i64::MIN, c - 1),
        BinOp::Le => (i64::MIN, c),
        BinOp::Gt => (c + 1, i64::MAX),
        BinOp::Ge => (c, i64::MAX),
        BinOp::Eq => (c, c),
        _ => return None,
    };
    Some((v, lo, hi))
}

#[derive(Default)]
struct Bounds {
    lo: Option<(i64, usize)>,
    hi: Option<(i64, usize)>,
}

/// Equivalent formula with trivially true conjuncts removed, nested
/// conjunctions flattened, and dominated bounds on a variable dropped in
/// favour of the tightest one. A provable contradiction yields `[false]`.
pub fn simplify(f: &Formula) -> Formula {
    let mut lits = Vec::new();
    for c in &f.constraints {
        flatten(c, &mut lits);
    }
    let contradiction = || Formula { constraints: vec![Term::truth(false)], vars: f.vars.clone() };
    if lits.iter().any(|l| l.as_truth() == Some(false)) {
        return contradiction();
    }
    lits.retain(|l| l.as_truth() != Some(true));

    let mut bounds: BTreeMap<VarId, Bounds> = BTreeMap::new();
    for (i, l) in lits.iter().enumerate() {
        if let Some((v, lo, hi)) = as_bound(l) {
            let b = bounds.entry(v).or_default();
            if lo != i64::MIN && b.lo.is_none_or(|(cur, _)| lo > cur) {
                b.lo = Some((lo, i));
            }
            if hi != i64::MAX && b.hi.is_none_or(|(cur, _)| hi < cur) {
                b.hi = Some((hi, i));
            }
        }
    }
    for (v, b) in &bounds {
        let dom = f.vars.domain(*v);
        let lo = b.lo.map(|x| x.0).into_iter().chain(dom.map(|d| d.lo)).max();
        let hi = b.hi.map(|x| x.0).into_iter().chain(dom.map(|d| d.hi)).min();
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if lo > hi {
                return contradiction();
            }
        }
    }
    let keep: Vec<Term> = lits
        .iter()
        .enumerate()
        .filter(|(i, l)| match as_bound(l) {
            None => true,
            Some((v, _, _)) => {
                let b = &bounds[&v];
                b.lo.map(|x| x.1) == Some(*i) || b.hi.map(|x| x.1) == Some(*i)
            }
        })
        .map(|(_, l)| l.clone())
        .collect();
    Formula { constraints: keep, vars: f.vars.clone() }
}
