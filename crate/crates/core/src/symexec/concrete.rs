//! Concrete interpreter over plain and instrumented programs.

use std::cell::Cell;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;
use crate::semantics::{eval, holds, truthy, RuntimeErrorKind, Store, TestInput};

use super::pc::Pc;

/// Default step limit of a concrete run.
pub const DEFAULT_FUEL: u64 = 100_000;

thread_local! {
    static STARTED: Cell<u64> = const { Cell::new(0) };
}

/// Concrete runs started on the calling thread so far.
pub fn runs_started() -> u64 {
    STARTED.with(Cell::get)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Return { value: Option<i64> },
    RuntimeError { error: RuntimeErrorKind, loc: LocationId },
    LabelExit { label: LabelId },
    /// An `__assert` failed; only reachable when a side branch is forced.
    AssertFailed { loc: LocationId },
    /// Fuel or the decision bound ran out.
    BoundExceeded,
}

/// How `if (__nondet)` side branches are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NondetPolicy {
    /// Never enter a side branch.
    #[default]
    AllFalse,
    /// Enter the side branch at the `visit`-th nondet site reached (0-based).
    ForkAt { visit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub fuel: u64,
    /// Stop with `BoundExceeded` before original decision `k + 1`.
    pub max_decisions: Option<usize>,
    pub nondet: NondetPolicy,
    /// Keep the store before every step in the trace.
    pub record_stores: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { fuel: DEFAULT_FUEL, max_decisions: None, nondet: NondetPolicy::AllFalse, record_stores: true }
    }
}

impl RunConfig {
    pub fn bounded(k: Option<usize>) -> Self {
        RunConfig { max_decisions: k, record_stores: false, ..RunConfig::default() }
    }
}

/// A run: every visited location with the store before it, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<(LocationId, Store)>,
    pub outcome: Outcome,
    /// Labels whose `__cover` hook fired.
    pub hooks: BTreeSet<LabelId>,
    /// `T`/`F` per branch taken (guards included), `L` per side branch.
    pub path: String,
    /// Original-program decisions taken.
    pub decisions: usize,
}

/// Steppable concrete machine.
#[derive(Debug, Clone)]
pub struct Machine<'p> {
    pc: Pc<'p>,
    pub store: Store,
    w: crate::semantics::IntWidth,
    cfg: RunConfig,
    steps: u64,
    nondet_visits: usize,
    pub decisions: usize,
    pub hooks: BTreeSet<LabelId>,
    pub path: String,
    pub outcome: Option<Outcome>,
}

impl<'p> Machine<'p> {
    pub fn new(p: &'p Program, input: &TestInput, cfg: RunConfig) -> Self {
        STARTED.with(|n| n.set(n.get() + 1));
        Machine {
            pc: Pc::new(&p.body),
            store: Store::from_input(input),
            w: p.width,
            cfg,
            steps: 0,
            nondet_visits: 0,
            decisions: 0,
            hooks: BTreeSet::new(),
            path: String::new(),
            outcome: None,
        }
    }

    /// Statement about to execute; `None` once the run has ended.
    pub fn current(&mut self) -> Option<&'p Stmt> {
        if self.outcome.is_some() {
            return None;
        }
        let s = self.pc.current();
        if s.is_none() {
            self.outcome = Some(Outcome::Return { value: None });
        }
        s
    }

    fn finish(&mut self, o: Outcome) -> Option<Outcome> {
        self.outcome = Some(o.clone());
        Some(o)
    }

    /// Executes one statement; returns the outcome once the run ends.
    pub fn step(&mut self) -> Option<Outcome> {
        let Some(s) = self.current() else { return self.outcome.clone() };
        self.steps += 1;
        if self.steps > self.cfg.fuel {
            return self.finish(Outcome::BoundExceeded);
        }
        let w = self.w;
        let trap = |kind| Outcome::RuntimeError { error: kind, loc: s.loc };
        match &s.kind {
            StmtKind::Decl { name, init } => match eval(init, &mut self.store, w) {
                Ok(v) => {
                    self.store.scalars.insert(name.clone(), v);
                    self.pc.advance();
                }
                Err(e) => return self.finish(trap(e)),
            },
            StmtKind::ArrayDecl { name, size } => {
                self.store.arrays.insert(name.clone(), vec![0; *size]);
                self.pc.advance();
            }
            StmtKind::Assign { lhs, rhs } => {
                let idx = match lhs {
                    Lvalue::Var(_) => None,
                    Lvalue::Index(_, i) => match eval(i, &mut self.store, w) {
                        Ok(v) => Some(v),
                        Err(e) => return self.finish(trap(e)),
                    },
                };
                let v = match eval(rhs, &mut self.store, w) {
                    Ok(v) => v,
                    Err(e) => return self.finish(trap(e)),
                };
                match (lhs, idx) {
                    (Lvalue::Index(name, _), Some(i)) => {
                        let Some(cells) = self.store.arrays.get_mut(name) else {
                            return self.finish(trap(RuntimeErrorKind::UndefinedVariable));
                        };
                        if i < 0 || i as usize >= cells.len() {
                            return self.finish(trap(RuntimeErrorKind::IndexOutOfBounds));
                        }
                        cells[i as usize] = v;
                    }
                    (lhs, _) => {
                        self.store.scalars.insert(lhs.name().to_string(), v);
                    }
                }
                self.pc.advance();
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.cfg.max_decisions.is_some_and(|k| self.decisions >= k) {
                    return self.finish(Outcome::BoundExceeded);
                }
                let c = match eval(cond, &mut self.store, w) {
                    Ok(v) => truthy(v),
                    Err(e) => return self.finish(trap(e)),
                };
                self.decisions += 1;
                self.path.push(if c { 'T' } else { 'F' });
                self.pc.branch(if c { then_block } else { else_block });
            }
            StmtKind::While { cond, body } => {
                if self.cfg.max_decisions.is_some_and(|k| self.decisions >= k) {
                    return self.finish(Outcome::BoundExceeded);
                }
                let c = match eval(cond, &mut self.store, w) {
                    Ok(v) => truthy(v),
                    Err(e) => return self.finish(trap(e)),
                };
                self.decisions += 1;
                self.path.push(if c { 'T' } else { 'F' });
                if c {
                    self.pc.enter(body);
                } else {
                    self.pc.advance();
                }
            }
            StmtKind::Return(e) => {
                return match eval(e, &mut self.store, w) {
                    Ok(v) => self.finish(Outcome::Return { value: Some(v) }),
                    Err(err) => self.finish(trap(err)),
                };
            }
            StmtKind::LabelPragma(_) => self.pc.advance(),
            StmtKind::Guard { pred, body, .. } => {
                if holds(pred, &self.store, w) {
                    self.path.push('T');
                    self.pc.branch(body);
                } else {
                    self.path.push('F');
                    self.pc.advance();
                }
            }
            StmtKind::NondetIf { body, .. } => {
                let take = self.cfg.nondet == NondetPolicy::ForkAt { visit: self.nondet_visits };
                self.nondet_visits += 1;
                if take {
                    self.path.push('L');
                    self.pc.branch(body);
                } else {
                    self.pc.advance();
                }
            }
            StmtKind::Assert(pred) => {
                if !holds(pred, &self.store, w) {
                    return self.finish(Outcome::AssertFailed { loc: s.loc });
                }
                self.pc.advance();
            }
            StmtKind::Exit(label) => return self.finish(Outcome::LabelExit { label: *label }),
            StmtKind::CoverHook(label) => {
                self.hooks.insert(*label);
                self.pc.advance();
            }
        }
        if self.current().is_none() {
            return self.outcome.clone();
        }
        None
    }

    /// Location of the next statement, or `None` once the run ended.
    pub fn position(&mut self) -> Option<LocationId> {
        self.current().map(|s| s.loc)
    }

    pub fn run_to_end(mut self) -> Trace {
        let mut steps = Vec::new();
        loop {
            let Some(s) = self.current() else { break };
            if self.cfg.record_stores {
                steps.push((s.loc, self.store.clone()));
            } else {
                steps.push((s.loc, Store::default()));
            }
            if self.step().is_some() {
                break;
            }
        }
        Trace {
            steps,
            outcome: self.outcome.clone().expect("run ended"),
            hooks: self.hooks,
            path: self.path,
            decisions: self.decisions,
        }
    }
}

/// Runs `p` on `input`.
pub fn concrete_run(p: &Program, input: &TestInput, cfg: RunConfig) -> Trace {
    Machine::new(p, input, cfg).run_to_end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::semantics::Value;

    fn input(pairs: &[(&str, i64)]) -> TestInput {
        pairs.iter().map(|(k, v)| (k.to_string(), Value::Scalar(*v))).collect()
    }

    #[test]
    fn takes_then_branch() {
        let p = parse("fn f(x: int) { let r = 0; if (x > 0) { r = 1; } else { r = 0; } return r; }").unwrap();
        let t = concrete_run(&p, &input(&[("x", 5)]), RunConfig::default());
        assert_eq!(t.outcome, Outcome::Return { value: Some(1) });
        assert_eq!(t.path, "T");
        let locs: Vec<u32> = t.steps.iter().map(|(l, _)| l.0).collect();
        assert_eq!(locs, [0, 1, 2, 4]);
    }

    #[test]
    fn division_by_zero_traps() {
        let p = parse("fn f(x: int) { let y = 10 / x; return y; }").unwrap();
        let t = concrete_run(&p, &input(&[("x", 0)]), RunConfig::default());
        assert_eq!(t.outcome, Outcome::RuntimeError { error: RuntimeErrorKind::DivisionByZero, loc: LocationId(0) });
    }

    #[test]
    fn loops_retest_condition() {
        let p = parse("fn f(n: int) { let s = 0; while (n > 0) { s = s + n; n = n - 1; } return s; }").unwrap();
        let t = concrete_run(&p, &input(&[("n", 3)]), RunConfig::default());
        assert_eq!(t.outcome, Outcome::Return { value: Some(6) });
        assert_eq!(t.path, "TTTF");
        let bounded = concrete_run(&p, &input(&[("n", 3)]), RunConfig::bounded(Some(2)));
        assert_eq!(bounded.outcome, Outcome::BoundExceeded);
        assert_eq!(bounded.decisions, 2);
    }

    #[test]
    fn fuel_exhaustion() {
        let p = parse("fn f(n: int) { while (n > 0) { n = n + 0; } }").unwrap();
        let cfg = RunConfig { fuel: 50, ..RunConfig::default() };
        assert_eq!(concrete_run(&p, &input(&[("n", 1)]), cfg).outcome, Outcome::BoundExceeded);
    }
}
