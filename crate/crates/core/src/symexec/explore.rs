//! Bounded depth-first symbolic exploration, with optional iterative label
//! deletion.
//!
//! Every pending state carries a model of its path constraint. Extending
//! the constraint only calls the solver when that model stops satisfying
//! it. Each leaf of the exploration tree counts as one explored path:
//! completed runs, infeasible branch sides and label side branches,
//! and solver timeouts alike.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;
use crate::instrument::{direct_instrument, tight_instrument};
use crate::labeling::AnnotatedProgram;
use crate::semantics::IntWidth;
use crate::solver::{self, Formula, Model, SolveResult, Term, VarTable};

use super::concrete::{concrete_run, Outcome, RunConfig, DEFAULT_FUEL};
use super::pc::Pc;
use super::suite::{CoverageStore, SuiteEntry, TestSuite};
use super::symbolic::{all, predicate_term, Evaluator, SymStore};

/// Iterative label deletion variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Idl {
    /// Plain exploration.
    #[default]
    Off,
    /// Mark the label of each solved side branch.
    Idl1,
    /// Additionally mark every label covered by replaying each new test.
    Idl2,
}

impl Idl {
    pub fn level(self) -> u8 {
        match self {
            Idl::Off => 0,
            Idl::Idl1 => 1,
            Idl::Idl2 => 2,
        }
    }

    pub fn from_level(n: u8) -> Option<Idl> {
        match n {
            0 => Some(Idl::Off),
            1 => Some(Idl::Idl1),
            2 => Some(Idl::Idl2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreConfig {
    /// Bound on original-program decisions per path.
    pub k: usize,
    /// Per-query solver budget.
    pub solver_budget: Duration,
    /// Wall-clock budget of the whole exploration.
    pub budget: Duration,
    /// Stop after this many explored paths.
    pub max_paths: Option<u64>,
    /// Statement visits per path before it is cut as bound-exceeded.
    pub fuel: u64,
}

impl ExploreConfig {
    pub fn with_k(k: usize) -> Self {
        ExploreConfig { k, ..ExploreConfig::default() }
    }
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            k: 20,
            solver_budget: solver::DEFAULT_BUDGET,
            budget: Duration::from_secs(300),
            max_paths: None,
            fuel: DEFAULT_FUEL,
        }
    }
}

#[derive(Clone)]
struct State<'p> {
    pc: Pc<'p>,
    store: SymStore,
    constraints: Vec<Term>,
    model: Model,
    decisions: usize,
    path: String,
    nondet_visits: usize,
    steps: u64,
    label_constraints: u64,
    /// Guards whose then-branch this path took.
    guards: Vec<LabelId>,
    /// Constraint to establish when the state is popped.
    pending: Option<Term>,
    /// Set on label side branches.
    fork: Option<LabelId>,
}

enum Check {
    Sat,
    Unsat,
    Timeout,
}

struct Engine<'p> {
    vars: Arc<VarTable>,
    w: IntWidth,
    cfg: ExploreConfig,
    idl: Idl,
    /// Hook-instrumented program replayed under idl2.
    replay: Option<&'p Program>,
    store: CoverageStore,
    suite: TestSuite,
    stack: Vec<State<'p>>,
    start: Instant,
}

impl<'p> Engine<'p> {
    fn out_of_budget(&mut self) -> bool {
        let capped = self.cfg.max_paths.is_some_and(|m| self.suite.stats.paths >= m);
        if capped || self.start.elapsed() > self.cfg.budget {
            self.suite.truncated = true;
        }
        self.suite.truncated
    }

    /// Adds `c` to the state's path constraint, keeping its model valid.
    fn assume(&mut self, st: &mut State<'p>, c: Term) -> Check {
        match c.as_truth() {
            Some(true) => return Check::Sat,
            Some(false) => return Check::Unsat,
            None => {}
        }
        st.constraints.push(c.clone());
        if c.holds(&st.model, self.w) {
            return Check::Sat;
        }
        self.suite.stats.solver_calls += 1;
        let f = Formula { constraints: st.constraints.clone(), vars: self.vars.clone() };
        match solver::solve(&f, self.cfg.solver_budget).expect("path variables have domains") {
            SolveResult::Sat(m) => {
                st.model = m;
                Check::Sat
            }
            SolveResult::UnsatWithinDomain => Check::Unsat,
            SolveResult::Timeout => Check::Timeout,
        }
    }

    fn leaf_infeasible(&mut self, st: &State<'p>, check: Check) {
        let stats = &mut self.suite.stats;
        stats.paths += 1;
        stats.max_path_len = stats.max_path_len.max(st.steps);
        match check {
            Check::Unsat => stats.unsat += 1,
            Check::Timeout => stats.timeout += 1,
            Check::Sat => unreachable!("satisfiable leaf reported as infeasible"),
        }
    }

    fn leaf_sat(&mut self, st: State<'p>, outcome: Outcome) {
        let stats = &mut self.suite.stats;
        stats.paths += 1;
        stats.sat += 1;
        stats.max_path_len = stats.max_path_len.max(st.steps);
        let inputs = self.vars.model_to_input(&st.model);
        let mut labels: Vec<LabelId> = match st.fork {
            Some(l) => vec![l],
            None => st.guards.clone(),
        };
        if self.idl != Idl::Off {
            if let Some(l) = st.fork {
                self.store.mark(l);
            }
        }
        if let (Idl::Idl2, Some(replay)) = (self.idl, self.replay) {
            let trace = concrete_run(replay, &inputs, RunConfig::bounded(Some(self.cfg.k)));
            for l in trace.hooks {
                self.store.mark(l);
                if !labels.contains(&l) {
                    labels.push(l);
                }
            }
            labels.sort();
        }
        self.suite.entries.push(SuiteEntry { inputs, path: st.path, labels, outcome: Some(outcome) });
    }

    fn covered(&self, l: LabelId) -> bool {
        self.idl != Idl::Off && self.store.is_covered(l)
    }

    /// Runs a popped state forward until it forks or ends.
    fn run(&mut self, mut st: State<'p>) {
        if let Some(c) = st.pending.take() {
            if let Some(l) = st.fork {
                if self.covered(l) {
                    self.suite.stats.pruned += 1;
                    return;
                }
                self.suite.stats.label_forks += 1;
                st.label_constraints += 1;
                self.suite.stats.max_label_constraints = self.suite.stats.max_label_constraints.max(st.label_constraints);
            }
            match self.assume(&mut st, c) {
                Check::Sat => {}
                other => return self.leaf_infeasible(&st, other),
            }
        }
        let w = self.w;
        loop {
            let Some(s) = st.pc.current() else { return self.leaf_sat(st, Outcome::Return { value: None }) };
            st.steps += 1;
            if st.steps > self.cfg.fuel {
                return self.leaf_sat(st, Outcome::BoundExceeded);
            }
            let mut sides = Vec::new();
            match &s.kind {
                StmtKind::Decl { name, init } => {
                    let v = Evaluator { store: &mut st.store, w }.eval(init, &mut sides);
                    st.store.scalars.insert(name.clone(), v);
                }
                StmtKind::ArrayDecl { name, size } => {
                    st.store.arrays.insert(name.clone(), vec![Term::constant(0); *size]);
                }
                StmtKind::Assign { lhs, rhs } => match lhs {
                    Lvalue::Var(name) => {
                        let v = Evaluator { store: &mut st.store, w }.eval(rhs, &mut sides);
                        st.store.scalars.insert(name.clone(), v);
                    }
                    Lvalue::Index(name, idx) => {
                        let mut ev = Evaluator { store: &mut st.store, w };
                        let i = ev.eval(idx, &mut sides);
                        let v = ev.eval(rhs, &mut sides);
                        ev.write_cell(name, &i, v, &mut sides);
                    }
                },
                StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => {
                    if st.decisions >= self.cfg.k {
                        return self.leaf_sat(st, Outcome::BoundExceeded);
                    }
                    let c = Evaluator { store: &mut st.store, w }.eval(cond, &mut sides);
                    match self.assume(&mut st, all(sides, w)) {
                        Check::Sat => {}
                        other => return self.leaf_infeasible(&st, other),
                    }
                    st.decisions += 1;
                    let mut then_st = st.clone();
                    let mut else_st = st;
                    then_st.path.push('T');
                    else_st.path.push('F');
                    match &s.kind {
                        StmtKind::If { then_block, else_block, .. } => {
                            then_st.pc.branch(then_block);
                            else_st.pc.branch(else_block);
                        }
                        StmtKind::While { body, .. } => {
                            then_st.pc.enter(body);
                            else_st.pc.advance();
                        }
                        _ => unreachable!(),
                    }
                    then_st.pending = Some(c.clone());
                    else_st.pending = Some(Term::not(c, w));
                    self.stack.push(else_st);
                    self.stack.push(then_st);
                    return;
                }
                StmtKind::Return(e) => {
                    let v = Evaluator { store: &mut st.store, w }.eval(e, &mut sides);
                    return match self.assume(&mut st, all(sides, w)) {
                        Check::Sat => {
                            let value = v.eval(&st.model, w);
                            self.leaf_sat(st, Outcome::Return { value: Some(value) })
                        }
                        other => self.leaf_infeasible(&st, other),
                    };
                }
                StmtKind::LabelPragma(_) => {}
                StmtKind::Guard { label, pred, body } => {
                    let holds = predicate_term(pred, &st.store, w);
                    let mut then_st = st.clone();
                    let mut else_st = st;
                    then_st.path.push('T');
                    else_st.path.push('F');
                    then_st.guards.push(*label);
                    then_st.pc.branch(body);
                    else_st.pc.advance();
                    then_st.pending = Some(holds.clone());
                    else_st.pending = Some(Term::not(holds, w));
                    self.stack.push(else_st);
                    self.stack.push(then_st);
                    return;
                }
                StmtKind::NondetIf { label, body } => {
                    let StmtKind::Assert(pred) = &body[0].kind else { panic!("side branch must start with an assertion") };
                    let holds = predicate_term(pred, &st.store, w);
                    st.nondet_visits += 1;
                    let mut fork = st.clone();
                    st.pc.advance();
                    self.stack.push(st);
                    if self.covered(*label) {
                        self.suite.stats.pruned += 1;
                    } else {
                        fork.path.push('L');
                        fork.pc.branch(body);
                        fork.fork = Some(*label);
                        fork.pending = Some(holds);
                        self.stack.push(fork);
                    }
                    return;
                }
                // The assertion was established when the side branch was popped.
                StmtKind::Assert(_) | StmtKind::CoverHook(_) => {}
                StmtKind::Exit(label) => return self.leaf_sat(st, Outcome::LabelExit { label: *label }),
            }
            match self.assume(&mut st, all(sides, w)) {
                Check::Sat => {}
                other => return self.leaf_infeasible(&st, other),
            }
            st.pc.advance();
        }
    }

    fn explore(mut self, p: &'p Program) -> (TestSuite, CoverageStore) {
        let initial_model: Model = self.vars.vars.iter().map(|v| v.domain.lo).collect();
        self.stack.push(State {
            pc: Pc::new(&p.body),
            store: SymStore::initial(p, &self.vars),
            constraints: Vec::new(),
            model: initial_model,
            decisions: 0,
            path: String::new(),
            nondet_visits: 0,
            steps: 0,
            label_constraints: 0,
            guards: Vec::new(),
            pending: None,
            fork: None,
        });
        while let Some(st) = self.stack.pop() {
            if self.out_of_budget() {
                break;
            }
            self.run(st);
        }
        self.suite.stats.time_ms = self.start.elapsed().as_millis() as u64;
        (self.suite, self.store)
    }
}

fn engine<'p>(p: &'p Program, cfg: ExploreConfig, idl: Idl, replay: Option<&'p Program>) -> Engine<'p> {
    Engine {
        vars: Arc::new(VarTable::from_program(p)),
        w: p.width,
        cfg,
        idl,
        replay,
        store: CoverageStore::default(),
        suite: TestSuite::default(),
        stack: Vec::new(),
        start: Instant::now(),
    }
}

/// Explores every path of `p` (plain or instrumented) with at most `cfg.k`
/// original decisions, depth first, then-branch and label side branch
/// first. One test per satisfiable path.
pub fn explore(p: &Program, cfg: ExploreConfig) -> TestSuite {
    engine(p, cfg, Idl::Off, None).explore(p).0
}

/// Explores the tight instrumentation of `ap` with iterative label
/// deletion.
pub fn explore_idl(ap: &AnnotatedProgram, cfg: ExploreConfig, idl: Idl) -> (TestSuite, CoverageStore) {
    let tight = tight_instrument(ap).program;
    let hooks = direct_instrument(ap, true).program;
    let replay = (idl == Idl::Idl2).then_some(&hooks);
    engine(&tight, cfg, idl, replay).explore(&tight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_expr};
    use crate::labeling::{label_cc, Criterion, Label, Origin};
    use crate::symexec::concrete::NondetPolicy;

    fn cfg(k: usize) -> ExploreConfig {
        ExploreConfig::with_k(k)
    }

    #[test]
    fn one_test_per_branch() {
        let p = parse("fn f(x: int) { let r = 0; if (x > 0) { r = 1; } else { r = 2; } return r; }").unwrap();
        let ts = explore(&p, cfg(10));
        assert_eq!(ts.entries.len(), 2);
        assert_eq!(ts.stats.paths, 2);
        assert_eq!(ts.entries[0].path, "T");
        assert_eq!(ts.entries[1].path, "F");
    }

    fn straight(n: usize) -> AnnotatedProgram {
        let params: Vec<String> = (0..n).map(|i| format!("x{i}: int in [-2, 2]")).collect();
        let body: Vec<String> = (0..n).map(|i| format!("x{i} = x{i} + 1;")).collect();
        let p = parse(&format!("fn s({}) {{ {} }}", params.join(", "), body.join(" "))).unwrap();
        let labels = (0..n)
            .map(|i| Label {
                id: LabelId(i as u32),
                loc: LocationId(i as u32),
                pred: parse_expr(&format!("x{i} > 0"), false).unwrap(),
                origin: Origin::of(Criterion::Pragma),
            })
            .collect();
        AnnotatedProgram { program: p, labels }
    }

    #[test]
    fn tight_single_label_has_two_paths() {
        let ap = straight(1);
        let ts = explore(&tight_instrument(&ap).program, cfg(5));
        assert_eq!(ts.stats.paths, 2);
        assert_eq!(ts.entries[0].path, "L");
        assert_eq!(ts.entries[0].labels, [LabelId(0)]);
        assert_eq!(ts.stats.max_label_constraints, 1);
    }

    #[test]
    fn direct_vs_tight_growth() {
        let ap = straight(3);
        assert_eq!(explore(&direct_instrument(&ap, false).program, cfg(5)).stats.paths, 8);
        assert_eq!(explore(&tight_instrument(&ap).program, cfg(5)).stats.paths, 4);
    }

    #[test]
    fn entries_replay_concretely() {
        let p = parse("fn f(x: int in [-5, 5], y: int in [-5, 5]) { let s = 0; while (x > 0) { x = x - 1; s = s + y; } if (s == 6) { return 1; } return 0; }").unwrap();
        let ap = label_cc(&p);
        for prog in [p.clone(), direct_instrument(&ap, false).program, tight_instrument(&ap).program] {
            let ts = explore(&prog, cfg(6));
            assert!(!ts.entries.is_empty());
            for e in &ts.entries {
                let visit = e.path.chars().filter(|c| *c == 'L').count();
                let nondet = if visit > 0 {
                    let fork_at = replay_fork_index(&prog, e);
                    NondetPolicy::ForkAt { visit: fork_at }
                } else {
                    NondetPolicy::AllFalse
                };
                let run = RunConfig { max_decisions: Some(6), nondet, ..RunConfig::default() };
                let t = concrete_run(&prog, &e.inputs, run);
                assert_eq!(t.path, e.path);
                assert_eq!(Some(t.outcome), e.outcome);
            }
        }
    }

    /// Index of the side-branch site at which the entry forked; the branch
    /// string alone does not say which site it was.
    fn replay_fork_index(prog: &Program, e: &SuiteEntry) -> usize {
        (0..)
            .find(|&visit| {
                let run = RunConfig { max_decisions: Some(6), nondet: NondetPolicy::ForkAt { visit }, ..RunConfig::default() };
                let t = concrete_run(prog, &e.inputs, run);
                t.path == e.path && Some(t.outcome) == e.outcome
            })
            .unwrap()
    }

    #[test]
    fn idl2_prunes_labels_covered_by_one_run() {
        let p = parse("fn f(x: int in [0, 9]) { x = x + 1; x = x + 1; x = x + 1; }").unwrap();
        let labels = (0..3)
            .map(|i| Label {
                id: LabelId(i),
                loc: LocationId(i),
                pred: parse_expr("x >= 0", false).unwrap(),
                origin: Origin::of(Criterion::Pragma),
            })
            .collect();
        let ap = AnnotatedProgram { program: p, labels };
        let (ts2, store2) = explore_idl(&ap, cfg(5), Idl::Idl2);
        let (ts1, store1) = explore_idl(&ap, cfg(5), Idl::Idl1);
        assert_eq!(store2.len(), 3);
        assert_eq!(store1.len(), 3);
        assert_eq!(ts2.stats.label_forks, 1);
        assert_eq!(ts2.stats.pruned, 2);
        assert_eq!(ts1.stats.label_forks, 3);
        assert!(ts2.stats.paths < ts1.stats.paths);
    }
}
