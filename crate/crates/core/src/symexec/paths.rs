//! Syntactic path counting and path predicates of explicit prefixes.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::ast::*;
use crate::solver::{Formula, Term, VarTable};

use super::pc::Pc;
use super::symbolic::{all, predicate_term, Evaluator, SymStore};

/// Number of maximal syntactic paths of `p` with at most `k` original
/// decisions, feasible or not. Guards fork both ways; a side branch adds
/// one path ending at its exit. Saturates at `u128::MAX`.
pub fn count_paths(p: &Program, k: usize) -> u128 {
    let mut memo = HashMap::new();
    count(Pc::new(&p.body), 0, k, &mut memo)
}

fn count<'p>(mut pc: Pc<'p>, decisions: usize, k: usize, memo: &mut HashMap<(Vec<(usize, usize)>, usize), u128>) -> u128 {
    loop {
        let Some(s) = pc.current() else { return 1 };
        match &s.kind {
            StmtKind::If { .. } | StmtKind::While { .. } | StmtKind::Guard { .. } => {
                let key = (pc.key(), decisions);
                if let Some(&n) = memo.get(&key) {
                    return n;
                }
                let n = match &s.kind {
                    StmtKind::If { then_block, else_block, .. } => {
                        if decisions >= k {
                            return 1;
                        }
                        let mut t = pc.clone();
                        t.branch(then_block);
                        let mut e = pc.clone();
                        e.branch(else_block);
                        count(t, decisions + 1, k, memo).saturating_add(count(e, decisions + 1, k, memo))
                    }
                    StmtKind::While { body, .. } => {
                        if decisions >= k {
                            return 1;
                        }
                        let mut t = pc.clone();
                        t.enter(body);
                        let mut e = pc.clone();
                        e.advance();
                        count(t, decisions + 1, k, memo).saturating_add(count(e, decisions + 1, k, memo))
                    }
                    StmtKind::Guard { body, .. } => {
                        let mut t = pc.clone();
                        t.branch(body);
                        let mut e = pc.clone();
                        e.advance();
                        count(t, decisions, k, memo).saturating_add(count(e, decisions, k, memo))
                    }
                    _ => unreachable!(),
                };
                memo.insert(key, n);
                return n;
            }
            StmtKind::NondetIf { .. } => {
                pc.advance();
                return count(pc, decisions, k, memo).saturating_add(1);
            }
            StmtKind::Return(_) | StmtKind::Exit(_) => return 1,
            _ => pc.advance(),
        }
    }
}

/// One decision of a path prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    /// A branch (original or guard) and the side taken.
    Branch(bool),
    /// The side branch of the given label.
    Fork(LabelId),
}

/// A path prefix as a sequence of decisions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathPrefix(pub Vec<Decision>);

impl PathPrefix {
    /// Reads a branch string made of `T` and `F` only.
    pub fn from_branches(s: &str) -> Option<PathPrefix> {
        s.chars()
            .map(|c| match c {
                'T' => Some(Decision::Branch(true)),
                'F' => Some(Decision::Branch(false)),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(PathPrefix)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("decision {index} does not match the program")]
    Mismatch { index: usize },
    #[error("path ends after {consumed} of {len} decisions")]
    TooLong { consumed: usize, len: usize },
}

/// The path predicate of `prefix`: branch conditions (or their negation)
/// under the symbolic store, non-trapping side conditions, and for a
/// fork the label predicate as last conjunct. Decisions are consumed in
/// order; nondet sites whose label is not the next fork fall through.
pub fn path_predicate(p: &Program, prefix: &PathPrefix) -> Result<Formula, PrefixError> {
    let vars = Arc::new(VarTable::from_program(p));
    let w = p.width;
    let mut store = SymStore::initial(p, &vars);
    let mut cs: Vec<Term> = Vec::new();
    let mut pc = Pc::new(&p.body);
    let mut next = prefix.0.iter().copied().enumerate().peekable();
    loop {
        let Some(&(index, d)) = next.peek() else { break };
        let Some(s) = pc.current() else { break };
        let mut sides = Vec::new();
        match &s.kind {
            StmtKind::Decl { name, init } => {
                let v = Evaluator { store: &mut store, w }.eval(init, &mut sides);
                store.scalars.insert(name.clone(), v);
            }
            StmtKind::ArrayDecl { name, size } => {
                store.arrays.insert(name.clone(), vec![Term::constant(0); *size]);
            }
            StmtKind::Assign { lhs, rhs } => {
                let mut ev = Evaluator { store: &mut store, w };
                match lhs {
                    Lvalue::Var(name) => {
                        let v = ev.eval(rhs, &mut sides);
                        ev.store.scalars.insert(name.clone(), v);
                    }
                    Lvalue::Index(name, idx) => {
                        let i = ev.eval(idx, &mut sides);
                        let v = ev.eval(rhs, &mut sides);
                        ev.write_cell(name, &i, v, &mut sides);
                    }
                }
            }
            StmtKind::If { cond, then_block, else_block } => {
                let Decision::Branch(taken) = d else { return Err(PrefixError::Mismatch { index }) };
                let c = Evaluator { store: &mut store, w }.eval(cond, &mut sides);
                cs.push(all(sides, w));
                cs.push(if taken { c } else { Term::not(c, w) });
                pc.branch(if taken { then_block } else { else_block });
                next.next();
                continue;
            }
            StmtKind::While { cond, body } => {
                let Decision::Branch(taken) = d else { return Err(PrefixError::Mismatch { index }) };
                let c = Evaluator { store: &mut store, w }.eval(cond, &mut sides);
                cs.push(all(sides, w));
                if taken {
                    cs.push(c);
                    pc.enter(body);
                } else {
                    cs.push(Term::not(c, w));
                    pc.advance();
                }
                next.next();
                continue;
            }
            StmtKind::Guard { pred, body, .. } => {
                let Decision::Branch(taken) = d else { return Err(PrefixError::Mismatch { index }) };
                let h = predicate_term(pred, &store, w);
                if taken {
                    cs.push(h);
                    pc.branch(body);
                } else {
                    cs.push(Term::not(h, w));
                    pc.advance();
                }
                next.next();
                continue;
            }
            StmtKind::NondetIf { label, body } => {
                if d == Decision::Fork(*label) {
                    let StmtKind::Assert(pred) = &body[0].kind else { return Err(PrefixError::Mismatch { index }) };
                    cs.push(predicate_term(pred, &store, w));
                    next.next();
                    break;
                }
            }
            StmtKind::Return(e) => {
                Evaluator { store: &mut store, w }.eval(e, &mut sides);
                cs.push(all(sides, w));
                break;
            }
            StmtKind::Exit(_) => break,
            StmtKind::LabelPragma(_) | StmtKind::Assert(_) | StmtKind::CoverHook(_) => {}
        }
        cs.push(all(sides, w));
        pc.advance();
    }
    let consumed = next.peek().map_or(prefix.0.len(), |&(i, _)| i);
    if consumed < prefix.0.len() {
        return Err(PrefixError::TooLong { consumed, len: prefix.0.len() });
    }
    cs.retain(|t| t.as_truth() != Some(true));
    Ok(Formula { constraints: cs, vars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_expr};
    use crate::instrument::{direct_instrument, tight_instrument};
    use crate::labeling::{AnnotatedProgram, Criterion, Label, Origin};
    use crate::solver::{solve, SolveResult, DEFAULT_BUDGET};

    /// Recursive enumeration over statement lists with explicit
    /// continuations, no sharing.
    fn enumerate<'a>(stmts: &[&'a Stmt], rest: &[Vec<&'a Stmt>], d: usize, k: usize) -> u128 {
        let Some((s, tail)) = stmts.split_first() else {
            return match rest.split_last() {
                None => 1,
                Some((up, outer)) => enumerate(up, outer, d, k),
            };
        };
        fn with<'a>(block: &'a [Stmt], loop_back: Option<&'a Stmt>, tail: &[&'a Stmt], rest: &[Vec<&'a Stmt>]) -> (Vec<&'a Stmt>, Vec<Vec<&'a Stmt>>) {
            let mut cont = rest.to_vec();
            let mut after: Vec<&Stmt> = loop_back.into_iter().collect();
            after.extend(tail.iter().copied());
            cont.push(after);
            (block.iter().collect(), cont)
        }
        match &s.kind {
            StmtKind::If { then_block, else_block, .. } => {
                if d >= k {
                    return 1;
                }
                let (t, tc) = with(then_block, None, tail, rest);
                let (e, ec) = with(else_block, None, tail, rest);
                enumerate(&t, &tc, d + 1, k) + enumerate(&e, &ec, d + 1, k)
            }
            StmtKind::While { body, .. } => {
                if d >= k {
                    return 1;
                }
                let (b, bc) = with(body, Some(s), tail, rest);
                enumerate(&b, &bc, d + 1, k) + enumerate(tail, rest, d + 1, k)
            }
            StmtKind::Guard { body, .. } => {
                let (b, bc) = with(body, None, tail, rest);
                enumerate(&b, &bc, d, k) + enumerate(tail, rest, d, k)
            }
            StmtKind::NondetIf { .. } => 1 + enumerate(tail, rest, d, k),
            StmtKind::Return(_) | StmtKind::Exit(_) => 1,
            _ => enumerate(tail, rest, d, k),
        }
    }

    fn naive(p: &Program, k: usize) -> u128 {
        let top: Vec<&Stmt> = p.body.iter().collect();
        enumerate(&top, &[], 0, k)
    }

    fn straight(n: usize) -> AnnotatedProgram {
        let body: Vec<String> = (0..n).map(|_| "x = x + 1;".to_string()).collect();
        let p = parse(&format!("fn s(x: int) {{ {} }}", body.join(" "))).unwrap();
        let labels = (0..n)
            .map(|i| Label {
                id: LabelId(i as u32),
                loc: LocationId(i as u32),
                pred: parse_expr("x > 0", false).unwrap(),
                origin: Origin::of(Criterion::Pragma),
            })
            .collect();
        AnnotatedProgram { program: p, labels }
    }

    #[test]
    fn straight_line_counts() {
        assert_eq!(count_paths(&straight(3).program, 5), 1);
        let ap = straight(10);
        assert_eq!(count_paths(&direct_instrument(&ap, false).program, 5), 1024);
        assert_eq!(count_paths(&tight_instrument(&ap).program, 5), 11);
    }

    #[test]
    fn agrees_with_naive_enumeration() {
        let src = "fn f(x: int, y: int) { let s = 0; while (x > 0) { if (y > x) { s = s + 1; } x = x - 1; } if (s == 2) { return 1; } else { y = 0; } return s; }";
        let p = parse(src).unwrap();
        let ap = crate::labeling::label_cc(&p);
        for k in 0..8 {
            for prog in [p.clone(), direct_instrument(&ap, false).program, tight_instrument(&ap).program] {
                assert_eq!(count_paths(&prog, k), naive(&prog, k), "k={k}");
            }
        }
    }

    #[test]
    fn then_prefix() {
        let p = parse("fn f(x: int) { if (x > 0) { x = 1; } else { x = 2; } }").unwrap();
        let f = path_predicate(&p, &PathPrefix::from_branches("T").unwrap()).unwrap();
        assert_eq!(f.display(), "(x > 0)");
    }

    #[test]
    fn fork_after_substitution_is_unsat() {
        let p = parse("fn f(x: int, y: int) { if (x > 0) { x = 1; } else { y = x + 1; y = y; } }").unwrap();
        let ap = AnnotatedProgram {
            labels: vec![Label {
                id: LabelId(0),
                loc: LocationId(3),
                pred: parse_expr("x == y", false).unwrap(),
                origin: Origin::of(Criterion::Pragma),
            }],
            program: p,
        };
        let tight = tight_instrument(&ap).program;
        let prefix = PathPrefix(vec![Decision::Branch(false), Decision::Fork(LabelId(0))]);
        let f = path_predicate(&tight, &prefix).unwrap();
        assert_eq!(solve(&f, DEFAULT_BUDGET).unwrap(), SolveResult::UnsatWithinDomain);
    }

    #[test]
    fn overlong_prefix() {
        let p = parse("fn f(x: int) { if (x > 0) { x = 1; } }").unwrap();
        let err = path_predicate(&p, &PathPrefix::from_branches("TT").unwrap()).unwrap_err();
        assert_eq!(err, PrefixError::TooLong { consumed: 1, len: 2 });
    }
}
