//! Scope and type checking: declare-before-use, no shadowing, scalar/array
//! discipline.

use std::collections::BTreeMap;

use super::ast::*;
use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Scalar,
    Array(usize),
}

/// Lexical scope chain.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    frames: Vec<BTreeMap<String, VarKind>>,
}

impl Scope {
    pub fn for_params(params: &[Param]) -> Self {
        let mut frame = BTreeMap::new();
        for p in params {
            let kind = match p.ty {
                ParamType::Int => VarKind::Scalar,
                ParamType::Array(n) => VarKind::Array(n),
            };
            frame.insert(p.name.clone(), kind);
        }
        Scope { frames: vec![frame] }
    }

    pub fn lookup(&self, name: &str) -> Option<VarKind> {
        self.frames.iter().rev().find_map(|f| f.get(name).copied())
    }

    fn push(&mut self) {
        self.frames.push(BTreeMap::new());
    }

    fn pop(&mut self) {
        self.frames.pop();
    }

    fn declare(&mut self, name: &str, kind: VarKind) -> bool {
        if self.lookup(name).is_some() {
            return false;
        }
        self.frames.last_mut().expect("scope frame").insert(name.to_string(), kind);
        true
    }

    /// All visible names.
    pub fn names(&self) -> BTreeMap<String, VarKind> {
        let mut out = BTreeMap::new();
        for f in &self.frames {
            for (k, v) in f {
                out.insert(k.clone(), *v);
            }
        }
        out
    }
}

fn type_error(line: u32, message: String) -> FrontendError {
    FrontendError::Type { line, message }
}

/// Checks that `e` only reads visible variables with the right kind.
pub fn check_expr(e: &Expr, scope: &Scope, line: u32) -> Result<(), FrontendError> {
    match e {
        Expr::Int(_) | Expr::Bool(_) => Ok(()),
        Expr::Var(n) | Expr::PostInc(n) | Expr::PostDec(n) => match scope.lookup(n) {
            Some(VarKind::Scalar) => Ok(()),
            Some(VarKind::Array(_)) => Err(type_error(line, format!("array `{n}` used as a scalar"))),
            None => Err(type_error(line, format!("variable `{n}` used before declaration"))),
        },
        Expr::Index(n, idx) => {
            match scope.lookup(n) {
                Some(VarKind::Array(_)) => {}
                Some(VarKind::Scalar) => return Err(type_error(line, format!("scalar `{n}` indexed as an array"))),
                None => return Err(type_error(line, format!("array `{n}` used before declaration"))),
            }
            if let Expr::Var(i) = idx.as_ref() {
                if let Some(VarKind::Array(_)) = scope.lookup(i) {
                    return Err(type_error(line, format!("array `{n}` indexed by array `{i}`")));
                }
            }
            check_expr(idx, scope, line)
        }
        Expr::Unary(_, e) => check_expr(e, scope, line),
        Expr::Binary(_, l, r) => {
            check_expr(l, scope, line)?;
            check_expr(r, scope, line)
        }
    }
}

fn check_reserved(name: &str, allow_reserved: bool, line: u32) -> Result<(), FrontendError> {
    if name.starts_with("__") && !allow_reserved {
        return Err(type_error(line, format!("identifier `{name}` uses the reserved `__` prefix")));
    }
    Ok(())
}

fn check_block(stmts: &[Stmt], scope: &mut Scope, allow_reserved: bool) -> Result<(), FrontendError> {
    scope.push();
    let result = stmts.iter().try_for_each(|s| check_stmt(s, scope, allow_reserved));
    scope.pop();
    result
}

fn check_stmt(s: &Stmt, scope: &mut Scope, allow_reserved: bool) -> Result<(), FrontendError> {
    let line = s.line;
    match &s.kind {
        StmtKind::Decl { name, init } => {
            check_reserved(name, allow_reserved, line)?;
            check_expr(init, scope, line)?;
            if !scope.declare(name, VarKind::Scalar) {
                return Err(type_error(line, format!("`{name}` shadows an existing variable")));
            }
            Ok(())
        }
        StmtKind::ArrayDecl { name, size } => {
            check_reserved(name, allow_reserved, line)?;
            if !scope.declare(name, VarKind::Array(*size)) {
                return Err(type_error(line, format!("`{name}` shadows an existing variable")));
            }
            Ok(())
        }
        StmtKind::Assign { lhs, rhs } => {
            check_expr(rhs, scope, line)?;
            match lhs {
                Lvalue::Var(n) => check_expr(&Expr::Var(n.clone()), scope, line),
                Lvalue::Index(n, i) => check_expr(&Expr::Index(n.clone(), Box::new(i.clone())), scope, line),
            }
        }
        StmtKind::If { cond, then_block, else_block } => {
            check_expr(cond, scope, line)?;
            check_block(then_block, scope, allow_reserved)?;
            check_block(else_block, scope, allow_reserved)
        }
        StmtKind::While { cond, body } => {
            check_expr(cond, scope, line)?;
            check_block(body, scope, allow_reserved)
        }
        StmtKind::Return(e) => check_expr(e, scope, line),
        StmtKind::LabelPragma(pred) => {
            if pred.has_side_effects() {
                return Err(type_error(line, "label predicate has side effects".into()));
            }
            check_expr(pred, scope, line)
        }
        StmtKind::Guard { pred, body, .. } => {
            check_expr(pred, scope, line)?;
            check_block(body, scope, allow_reserved)
        }
        StmtKind::NondetIf { body, .. } => check_block(body, scope, allow_reserved),
        StmtKind::Assert(e) => check_expr(e, scope, line),
        StmtKind::Exit(_) | StmtKind::CoverHook(_) => Ok(()),
    }
}

pub fn check_program(p: &Program, allow_reserved: bool) -> Result<(), FrontendError> {
    let mut seen = std::collections::BTreeSet::new();
    for param in &p.params {
        check_reserved(&param.name, allow_reserved, 0)?;
        if !seen.insert(param.name.clone()) {
            return Err(type_error(0, format!("duplicate parameter `{}`", param.name)));
        }
    }
    let mut scope = Scope::for_params(&p.params);
    check_block(&p.body, &mut scope, allow_reserved)
}

/// Variables visible immediately before each location executes.
pub fn scopes_at_locations(p: &Program) -> BTreeMap<LocationId, BTreeMap<String, VarKind>> {
    fn go(stmts: &[Stmt], scope: &mut Scope, out: &mut BTreeMap<LocationId, BTreeMap<String, VarKind>>) {
        scope.push();
        for s in stmts {
            out.insert(s.loc, scope.names());
            for child in s.children() {
                go(child, scope, out);
            }
            match &s.kind {
                StmtKind::Decl { name, .. } => {
                    scope.declare(name, VarKind::Scalar);
                }
                StmtKind::ArrayDecl { name, size } => {
                    scope.declare(name, VarKind::Array(*size));
                }
                _ => {}
            }
        }
        scope.pop();
    }
    let mut out = BTreeMap::new();
    let mut scope = Scope::for_params(&p.params);
    go(&p.body, &mut scope, &mut out);
    out
}
