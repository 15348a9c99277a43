//! Hash-consing-free symbolic terms over input variables.
//!
//! Terms are immutable DAGs behind `Arc`. Constructors fold constants at the
//! program's integer width, so a path predicate whose conditions do not
//! depend on inputs collapses to literals.

use std::fmt;
use std::sync::Arc;

use crate::frontend::ast::{BinOp, ParamType, Program, UnOp};
use crate::semantics::{apply_binary_total, apply_unary, truthy, IntWidth, Interval, TestInput, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    /// `x` for scalars, `a[3]` for array cells.
    pub name: String,
    pub domain: Interval,
}

/// Symbolic input variables of an entry function, one per scalar parameter
/// and one per array cell, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarTable {
    pub vars: Vec<VarInfo>,
    pub width: IntWidth,
    /// Parameter layout: (name, first var, cell count or None for scalars).
    layout: Vec<(String, u32, Option<usize>)>,
}

/// An assignment of every input variable, indexed by [`VarId`].
pub type Model = Vec<i64>;

impl VarTable {
    pub fn from_program(p: &Program) -> Self {
        let mut vars = Vec::new();
        let mut layout = Vec::new();
        for param in &p.params {
            let first = vars.len() as u32;
            match param.ty {
                ParamType::Int => {
                    vars.push(VarInfo { name: param.name.clone(), domain: param.domain });
                    layout.push((param.name.clone(), first, None));
                }
                ParamType::Array(n) => {
                    for i in 0..n {
                        vars.push(VarInfo { name: format!("{}[{i}]", param.name), domain: param.domain });
                    }
                    layout.push((param.name.clone(), first, Some(n)));
                }
            }
        }
        VarTable { vars, width: p.width, layout }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn domain(&self, v: VarId) -> Option<Interval> {
        self.vars.get(v.0 as usize).map(|i| i.domain)
    }

    /// Scalar parameter variable.
    pub fn scalar(&self, name: &str) -> Option<VarId> {
        self.layout.iter().find(|(n, _, cells)| n == name && cells.is_none()).map(|(_, first, _)| VarId(*first))
    }

    /// Variables of an array parameter's cells.
    pub fn cells(&self, name: &str) -> Option<Vec<VarId>> {
        self.layout
            .iter()
            .find(|(n, _, cells)| n == name && cells.is_some())
            .map(|(_, first, cells)| (0..cells.unwrap() as u32).map(|i| VarId(first + i)).collect())
    }

    /// Model where every variable takes 0 if its domain allows, else the
    /// domain's lower bound.
    pub fn default_model(&self) -> Model {
        self.vars.iter().map(|v| if v.domain.contains(0) { 0 } else { v.domain.lo }).collect()
    }

    pub fn model_to_input(&self, model: &Model) -> TestInput {
        let mut out = TestInput::new();
        for (name, first, cells) in &self.layout {
            let first = *first as usize;
            let value = match cells {
                None => Value::Scalar(model[first]),
                Some(n) => Value::Array(model[first..first + n].to_vec()),
            };
            out.insert(name.clone(), value);
        }
        out
    }

    pub fn input_to_model(&self, input: &TestInput) -> Option<Model> {
        let mut model = vec![0; self.vars.len()];
        for (name, first, cells) in &self.layout {
            let first = *first as usize;
            match (cells, input.get(name)?) {
                (None, Value::Scalar(v)) => model[first] = *v,
                (Some(n), Value::Array(vs)) if vs.len() == *n => model[first..first + n].copy_from_slice(vs),
                _ => return None,
            }
        }
        Some(model)
    }

    pub fn in_domain(&self, model: &Model) -> bool {
        model.len() == self.vars.len() && self.vars.iter().zip(model).all(|(v, x)| v.domain.contains(*x))
    }
}

#[derive(Debug)]
pub enum Node {
    Const(i64),
    Var(VarId),
    Unary(UnOp, Term),
    Binary(BinOp, Term, Term),
    Ite(Term, Term, Term),
}

#[derive(Debug, Clone)]
pub struct Term(Arc<TermInner>);

#[derive(Debug)]
pub struct TermInner {
    pub node: Node,
    /// Value is always 0 or 1.
    pub boolean: bool,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.structural_eq(other)
    }
}

impl Eq for Term {}

impl Term {
    fn make(node: Node, boolean: bool) -> Term {
        Term(Arc::new(TermInner { node, boolean }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn is_boolean(&self) -> bool {
        self.0.boolean
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn structural_eq(&self, other: &Term) -> bool {
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a == b,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Unary(o1, a), Node::Unary(o2, b)) => o1 == o2 && a == b,
            (Node::Binary(o1, a1, b1), Node::Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (Node::Ite(c1, a1, b1), Node::Ite(c2, a2, b2)) => c1 == c2 && a1 == a2 && b1 == b2,
            _ => false,
        }
    }

    pub fn constant(v: i64) -> Term {
        Term::make(Node::Const(v), v == 0 || v == 1)
    }

    pub fn truth(b: bool) -> Term {
        Term::constant(b as i64)
    }

    pub fn var(v: VarId) -> Term {
        Term::make(Node::Var(v), false)
    }

    pub fn as_const(&self) -> Option<i64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// `Some(truthiness)` when the term is a literal.
    pub fn as_truth(&self) -> Option<bool> {
        self.as_const().map(truthy)
    }

    pub fn unary(op: UnOp, a: Term, w: IntWidth) -> Term {
        if let Some(v) = a.as_const() {
            return Term::constant(apply_unary(op, v, w));
        }
        if op == UnOp::Not {
            if let Node::Unary(UnOp::Not, inner) = a.node() {
                if inner.is_boolean() {
                    return inner.clone();
                }
            }
        }
        Term::make(Node::Unary(op, a), op == UnOp::Not)
    }

    pub fn not(a: Term, w: IntWidth) -> Term {
        Term::unary(UnOp::Not, a, w)
    }

    pub fn binary(op: BinOp, a: Term, b: Term, w: IntWidth) -> Term {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Term::constant(apply_binary_total(op, x, y, w));
        }
        let to_bool = |t: Term| if t.is_boolean() { t } else { Term::binary(BinOp::Ne, t, Term::constant(0), w) };
        match op {
            BinOp::And => match (a.as_truth(), b.as_truth()) {
                (Some(false), _) | (_, Some(false)) => return Term::truth(false),
                (Some(true), _) => return to_bool(b),
                (_, Some(true)) => return to_bool(a),
                _ => {}
            },
            BinOp::Or => match (a.as_truth(), b.as_truth()) {
                (Some(true), _) | (_, Some(true)) => return Term::truth(true),
                (Some(false), _) => return to_bool(b),
                (_, Some(false)) => return to_bool(a),
                _ => {}
            },
            BinOp::Xor => match (a.as_truth(), b.as_truth()) {
                (Some(false), _) => return to_bool(b),
                (_, Some(false)) => return to_bool(a),
                (Some(true), _) => return Term::not(b, w),
                (_, Some(true)) => return Term::not(a, w),
                _ if a == b => return Term::truth(false),
                _ => {}
            },
            BinOp::Add if a.as_const() == Some(0) => return b,
            BinOp::Add | BinOp::Sub if b.as_const() == Some(0) => return a,
            BinOp::Mul if a.as_const() == Some(1) => return b,
            BinOp::Mul if b.as_const() == Some(1) => return a,
            BinOp::Eq | BinOp::Le | BinOp::Ge if a == b => return Term::truth(true),
            BinOp::Ne | BinOp::Lt | BinOp::Gt if a == b => return Term::truth(false),
            BinOp::Sub if a == b => return Term::constant(0),
            _ => {}
        }
        let boolean = op.is_relational() || op.is_connective();
        Term::make(Node::Binary(op, a, b), boolean)
    }

    pub fn and(a: Term, b: Term, w: IntWidth) -> Term {
        Term::binary(BinOp::And, a, b, w)
    }

    pub fn or(a: Term, b: Term, w: IntWidth) -> Term {
        Term::binary(BinOp::Or, a, b, w)
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        if let Some(t) = c.as_truth() {
            return if t { a } else { b };
        }
        if a == b {
            return a;
        }
        let boolean = a.is_boolean() && b.is_boolean();
        Term::make(Node::Ite(c, a, b), boolean)
    }

    /// Total evaluation under a full model (division by zero yields 0).
    pub fn eval(&self, model: &[i64], w: IntWidth) -> i64 {
        match self.node() {
            Node::Const(v) => *v,
            Node::Var(v) => model[v.0 as usize],
            Node::Unary(op, a) => apply_unary(*op, a.eval(model, w), w),
            Node::Binary(BinOp::And, a, b) => (truthy(a.eval(model, w)) && truthy(b.eval(model, w))) as i64,
            Node::Binary(BinOp::Or, a, b) => (truthy(a.eval(model, w)) || truthy(b.eval(model, w))) as i64,
            Node::Binary(op, a, b) => apply_binary_total(*op, a.eval(model, w), b.eval(model, w), w),
            Node::Ite(c, a, b) => {
                if truthy(c.eval(model, w)) {
                    a.eval(model, w)
                } else {
                    b.eval(model, w)
                }
            }
        }
    }

    pub fn holds(&self, model: &[i64], w: IntWidth) -> bool {
        truthy(self.eval(model, w))
    }

    /// Distinct variables occurring in the term, ascending.
    pub fn vars(&self) -> Vec<VarId> {
        let mut seen = std::collections::HashSet::new();
        let mut out = std::collections::BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.ptr_id()) {
                continue;
            }
            match t.node() {
                Node::Const(_) => {}
                Node::Var(v) => {
                    out.insert(*v);
                }
                Node::Unary(_, a) => stack.push(a.clone()),
                Node::Binary(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::Ite(c, a, b) => {
                    stack.push(c.clone());
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> TermDisplay<'a> {
        TermDisplay { term: self, vars }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    vars: &'a VarTable,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Term, vars: &VarTable, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t.node() {
                Node::Const(v) => write!(f, "{v}"),
                Node::Var(v) => match vars.vars.get(v.0 as usize) {
                    Some(info) => f.write_str(&info.name),
                    None => write!(f, "v{}", v.0),
                },
                Node::Unary(op, a) => {
                    let sym = match op {
                        UnOp::Neg => "-",
                        UnOp::Not => "!",
                        UnOp::Abs => "abs",
                    };
                    write!(f, "{sym}(")?;
                    go(a, vars, f)?;
                    f.write_str(")")
                }
                Node::Binary(op, a, b) => {
                    f.write_str("(")?;
                    go(a, vars, f)?;
                    write!(f, " {} ", op.symbol())?;
                    go(b, vars, f)?;
                    f.write_str(")")
                }
                Node::Ite(c, a, b) => {
                    f.write_str("ite(")?;
                    go(c, vars, f)?;
                    f.write_str(", ")?;
                    go(a, vars, f)?;
                    f.write_str(", ")?;
                    go(b, vars, f)?;
                    f.write_str(")")
                }
            }
        }
        go(self.term, self.vars, f)
    }
}
