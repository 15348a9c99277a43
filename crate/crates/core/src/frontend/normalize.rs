//! Hoists side effects out of branching conditions.
//!
//! `if (x++ <= y && e == f)` becomes `let __tmp0 = x++; if (__tmp0 <= y && e == f)`.
//! For loops the hoisted assignments are replayed at the end of the body so
//! the condition sees fresh values on every iteration.

use super::ast::*;
use super::FrontendError;

struct Hoister {
    next_tmp: usize,
}

impl Hoister {
    fn fresh(&mut self) -> String {
        let name = format!("__tmp{}", self.next_tmp);
        self.next_tmp += 1;
        name
    }

    /// Replaces every `x++`/`x--` of `e` by a fresh temporary, recording
    /// `(tmp, bump)` in evaluation order.
    fn hoist(
        &mut self,
        e: &Expr,
        conditional: bool,
        read: &mut Vec<String>,
        out: &mut Vec<(String, Expr)>,
        line: u32,
    ) -> Result<Expr, FrontendError> {
        Ok(match e {
            Expr::Int(_) | Expr::Bool(_) => e.clone(),
            Expr::Var(n) => {
                read.push(n.clone());
                e.clone()
            }
            Expr::PostInc(n) | Expr::PostDec(n) => {
                if conditional {
                    return Err(FrontendError::Type {
                        line,
                        message: format!("side effect on `{n}` under a short-circuit operator cannot be hoisted"),
                    });
                }
                if read.contains(n) {
                    return Err(FrontendError::Type {
                        line,
                        message: format!("`{n}` is read before its increment in the same condition"),
                    });
                }
                let tmp = self.fresh();
                out.push((tmp.clone(), e.clone()));
                read.push(n.clone());
                Expr::Var(tmp)
            }
            Expr::Index(n, idx) => {
                let idx = self.hoist(idx, conditional, read, out, line)?;
                Expr::Index(n.clone(), Box::new(idx))
            }
            Expr::Unary(op, inner) => Expr::unary(*op, self.hoist(inner, conditional, read, out, line)?),
            Expr::Binary(op, l, r) => {
                let l = self.hoist(l, conditional, read, out, line)?;
                let short = matches!(op, BinOp::And | BinOp::Or);
                let r = self.hoist(r, conditional || short, read, out, line)?;
                Expr::binary(*op, l, r)
            }
        })
    }

    fn block(&mut self, stmts: Vec<Stmt>) -> Result<Vec<Stmt>, FrontendError> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            let line = s.line;
            let synth = |kind: StmtKind| Stmt { loc: LocationId(0), line, kind };
            match s.kind {
                StmtKind::If { cond, then_block, else_block } => {
                    let mut hoisted = Vec::new();
                    let cond = if cond.has_side_effects() {
                        self.hoist(&cond, false, &mut Vec::new(), &mut hoisted, line)?
                    } else {
                        cond
                    };
                    for (tmp, bump) in hoisted {
                        out.push(synth(StmtKind::Decl { name: tmp, init: bump }));
                    }
                    let then_block = self.block(then_block)?;
                    let else_block = self.block(else_block)?;
                    out.push(Stmt { kind: StmtKind::If { cond, then_block, else_block }, ..s });
                }
                StmtKind::While { cond, body } => {
                    let mut hoisted = Vec::new();
                    let cond = if cond.has_side_effects() {
                        self.hoist(&cond, false, &mut Vec::new(), &mut hoisted, line)?
                    } else {
                        cond
                    };
                    let mut body = self.block(body)?;
                    for (tmp, bump) in &hoisted {
                        out.push(synth(StmtKind::Decl { name: tmp.clone(), init: bump.clone() }));
                        body.push(synth(StmtKind::Assign { lhs: Lvalue::Var(tmp.clone()), rhs: bump.clone() }));
                    }
                    out.push(Stmt { kind: StmtKind::While { cond, body }, ..s });
                }
                kind => out.push(Stmt { kind, ..s }),
            }
        }
        Ok(out)
    }
}

fn max_tmp_index(p: &Program) -> usize {
    let mut next = 0;
    p.walk(&mut |s| {
        if let StmtKind::Decl { name, .. } = &s.kind {
            if let Some(n) = name.strip_prefix("__tmp").and_then(|d| d.parse::<usize>().ok()) {
                next = next.max(n + 1);
            }
        }
    });
    next
}

/// Returns a semantically equivalent program whose branching conditions are
/// side-effect free, with location ids reassigned densely.
pub fn normalize(p: &Program) -> Result<Program, FrontendError> {
    let mut hoister = Hoister { next_tmp: max_tmp_index(p) };
    let body = hoister.block(p.body.clone())?;
    let mut out = Program { body, ..p.clone() };
    out.renumber();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, printer::program_to_string};

    #[test]
    fn hoists_post_increment_before_branch() {
        let p = parse("fn f(x: int, y: int, e: int, g: int) { if (x++ <= y && e == g) { y = 0; } }").unwrap();
        let n = normalize(&p).unwrap();
        let text = program_to_string(&n);
        assert!(text.contains("  let __tmp0 = x++;\n  if (__tmp0 <= y && e == g) {"), "{text}");
    }

    #[test]
    fn side_effect_free_program_is_fixpoint() {
        let p = parse("fn f(x: int) { let r = 0; while (x > 0) { x = x - 1; r = r + 2; } return r; }").unwrap();
        assert_eq!(normalize(&p).unwrap(), p);
    }

    #[test]
    fn loop_condition_is_replayed() {
        let p = parse("fn f(n: int) { let c = 0; while (n-- > 0) { c = c + 1; } return c; }").unwrap();
        let n = normalize(&p).unwrap();
        let text = program_to_string(&n);
        assert!(text.contains("let __tmp0 = n--;\n  while (__tmp0 > 0) {\n    c = c + 1;\n    __tmp0 = n--;\n  }"), "{text}");
    }

    #[test]
    fn rejects_unhoistable_effects() {
        let p = parse("fn f(x: int, a: int) { if (a > 0 && x++ < 3) { a = 1; } }").unwrap();
        assert!(normalize(&p).is_err());
        let p = parse("fn f(x: int) { if (x + x++ < 3) { x = 1; } }").unwrap();
        assert!(normalize(&p).is_err());
    }
}
