//! Typed AST of the mini-language.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::semantics::{IntWidth, Interval};

/// Stable statement identifier, dense and assigned in source (pre-)order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocationId(pub u32);

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u32);

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Xor,
}

impl BinOp {
    pub const ARITHMETIC: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem];
    pub const RELATIONAL: [BinOp; 6] = [BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge];

    pub fn symbol(self) -> &'static str {
        use BinOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
            Eq => "==",
            Ne => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            And => "&&",
            Or => "||",
            Xor => "^",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        use BinOp::*;
        match self {
            Or => 1,
            And => 2,
            Xor => 3,
            Eq | Ne => 4,
            Lt | Le | Gt | Ge => 5,
            Add | Sub => 6,
            Mul | Div | Rem => 7,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        Self::ARITHMETIC.contains(&self)
    }

    pub fn is_relational(self) -> bool {
        Self::RELATIONAL.contains(&self)
    }

    /// `&&`, `||` and `^` are the boolean connectives.
    pub fn is_connective(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Xor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
    Abs,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Index(String, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `x++`; only present before normalization hoists it out of conditions.
    PostInc(String),
    PostDec(String),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    /// Logical negation that folds literals and double negation.
    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::Bool(b) => Expr::Bool(!b),
            Expr::Unary(UnOp::Not, inner) if inner.is_boolean() => *inner,
            other => Expr::unary(UnOp::Not, other),
        }
    }

    /// Conjunction that drops `true` operands.
    pub fn and(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Bool(true), r) => r,
            (l, Expr::Bool(true)) => l,
            (Expr::Bool(false), _) | (_, Expr::Bool(false)) => Expr::Bool(false),
            (l, r) => Expr::binary(BinOp::And, l, r),
        }
    }

    pub fn or(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Bool(false), r) => r,
            (l, Expr::Bool(false)) => l,
            (Expr::Bool(true), _) | (_, Expr::Bool(true)) => Expr::Bool(true),
            (l, r) => Expr::binary(BinOp::Or, l, r),
        }
    }

    pub fn and_all(items: impl IntoIterator<Item = Expr>) -> Expr {
        items.into_iter().fold(Expr::Bool(true), Expr::and)
    }

    /// True for expressions whose value is always 0 or 1.
    pub fn is_boolean(&self) -> bool {
        match self {
            Expr::Bool(_) => true,
            Expr::Unary(UnOp::Not, _) => true,
            Expr::Binary(op, _, _) => op.is_relational() || op.is_connective(),
            _ => false,
        }
    }

    pub fn has_side_effects(&self) -> bool {
        match self {
            Expr::PostInc(_) | Expr::PostDec(_) => true,
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => false,
            Expr::Index(_, e) | Expr::Unary(_, e) => e.has_side_effects(),
            Expr::Binary(_, l, r) => l.has_side_effects() || r.has_side_effects(),
        }
    }

    /// Calls `f` on every variable or array name read (or bumped) by the
    /// expression, left to right.
    pub fn visit_names(&self, f: &mut impl FnMut(&str, bool)) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(n) | Expr::PostInc(n) | Expr::PostDec(n) => f(n, false),
            Expr::Index(n, e) => {
                f(n, true);
                e.visit_names(f);
            }
            Expr::Unary(_, e) => e.visit_names(f),
            Expr::Binary(_, l, r) => {
                l.visit_names(f);
                r.visit_names(f);
            }
        }
    }

    /// Number of nodes, used to bound generated predicate sizes in tests.
    pub fn size(&self) -> usize {
        match self {
            Expr::Index(_, e) | Expr::Unary(_, e) => 1 + e.size(),
            Expr::Binary(_, l, r) => 1 + l.size() + r.size(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lvalue {
    Var(String),
    Index(String, Expr),
}

impl Lvalue {
    pub fn name(&self) -> &str {
        match self {
            Lvalue::Var(n) | Lvalue::Index(n, _) => n,
        }
    }

    /// The lvalue read as an expression.
    pub fn as_expr(&self) -> Expr {
        match self {
            Lvalue::Var(n) => Expr::Var(n.clone()),
            Lvalue::Index(n, i) => Expr::Index(n.clone(), Box::new(i.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamType {
    Int,
    Array(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub ty: ParamType,
    pub domain: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub loc: LocationId,
    /// 1-based source line; 0 for synthesized statements.
    pub line: u32,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Decl { name: String, init: Expr },
    /// `let buf[n];` zero-initialized local array.
    ArrayDecl { name: String, size: usize },
    Assign { lhs: Lvalue, rhs: Expr },
    If { cond: Expr, then_block: Vec<Stmt>, else_block: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    Return(Expr),
    /// `//@label pred`, attached to the next statement.
    LabelPragma(Expr),
    // Instrumentation-only forms; never produced by the parser.
    /// Direct-instrumentation guard `if (pred) { body }` for one label.
    Guard { label: LabelId, pred: Expr, body: Vec<Stmt> },
    /// Tight-instrumentation side branch `if (__nondet) { body }`.
    NondetIf { label: LabelId, body: Vec<Stmt> },
    Assert(Expr),
    Exit(LabelId),
    CoverHook(LabelId),
}

impl StmtKind {
    pub fn is_branching(&self) -> bool {
        matches!(self, StmtKind::If { .. } | StmtKind::While { .. })
    }

    pub fn is_instrumentation(&self) -> bool {
        matches!(
            self,
            StmtKind::Guard { .. }
                | StmtKind::NondetIf { .. }
                | StmtKind::Assert(_)
                | StmtKind::Exit(_)
                | StmtKind::CoverHook(_)
        )
    }

    /// The branching condition of an `if`/`while`.
    pub fn condition(&self) -> Option<&Expr> {
        match self {
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            _ => None,
        }
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt { loc: LocationId(0), line: 0, kind }
    }

    pub fn children(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => vec![then_block, else_block],
            StmtKind::While { body, .. } | StmtKind::Guard { body, .. } | StmtKind::NondetIf { body, .. } => {
                vec![body]
            }
            _ => vec![],
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::If { then_block, else_block, .. } => vec![then_block, else_block],
            StmtKind::While { body, .. } | StmtKind::Guard { body, .. } | StmtKind::NondetIf { body, .. } => {
                vec![body]
            }
            _ => vec![],
        }
    }
}

/// A program of the mini-language: a single entry function.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub width: IntWidth,
}

impl Program {
    /// Pre-order walk over every statement.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        fn go<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
            for s in stmts {
                f(s);
                for child in s.children() {
                    go(child, f);
                }
            }
        }
        go(&self.body, f)
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        fn go(stmts: &mut [Stmt], f: &mut impl FnMut(&mut Stmt)) {
            for s in stmts {
                f(s);
                for child in s.children_mut() {
                    go(child, f);
                }
            }
        }
        go(&mut self.body, f)
    }

    /// Statements in location order.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        self.walk(&mut |s| out.push(s));
        out
    }

    pub fn stmt(&self, loc: LocationId) -> Option<&Stmt> {
        let mut found = None;
        self.walk(&mut |s| {
            if s.loc == loc && found.is_none() {
                found = Some(s);
            }
        });
        found
    }

    pub fn stmt_mut(&mut self, loc: LocationId) -> Option<&mut Stmt> {
        fn go(stmts: &mut [Stmt], loc: LocationId) -> Option<&mut Stmt> {
            for s in stmts {
                if s.loc == loc {
                    return Some(s);
                }
                for child in s.children_mut() {
                    if let Some(hit) = go(child, loc) {
                        return Some(hit);
                    }
                }
            }
            None
        }
        go(&mut self.body, loc)
    }

    /// Reassigns dense location ids in pre-order.
    pub fn renumber(&mut self) {
        let mut next = 0u32;
        self.walk_mut(&mut |s| {
            s.loc = LocationId(next);
            next += 1;
        });
    }

    pub fn location_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Location of the first executable statement (the entry point), if any.
    pub fn entry_location(&self) -> Option<LocationId> {
        self.statements()
            .into_iter()
            .find(|s| !matches!(s.kind, StmtKind::LabelPragma(_)))
            .map(|s| s.loc)
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Same program with every parameter (and array cell) domain replaced.
    pub fn with_uniform_domain(&self, lo: i64, hi: i64) -> Program {
        let mut p = self.clone();
        for param in &mut p.params {
            param.domain = Interval::new(lo, hi);
        }
        p
    }

    /// Number of points in the input domain, saturating.
    pub fn domain_size(&self) -> u128 {
        self.params.iter().fold(1u128, |acc, p| {
            let cells = match p.ty {
                ParamType::Int => 1,
                ParamType::Array(n) => n as u32,
            };
            let per = (p.domain.width() as u128).saturating_pow(cells);
            acc.saturating_mul(per)
        })
    }
}
