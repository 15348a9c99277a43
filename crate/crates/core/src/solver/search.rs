//! Branch and prune over input boxes. A feasibility search propagates,
//! splits the undecided constraints into independent groups and bisects
//! the busiest variable of a group. The first model in lexicographic order
//! is then pinned down one variable at a time by narrowing its range.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use crate::frontend::ast::UnOp;
use crate::semantics::{IntWidth, Interval};

use super::interval::{propagate, range, truth, Truth};
use super::term::{Model, Node, Term, VarId};
use super::{Formula, SolveResult, SolverError};

struct Search {
    w: IntWidth,
    start: Instant,
    budget: Duration,
    nodes: u64,
    timed_out: bool,
}

/// Rebuilds `t` under the box `doms`: subterms with a single possible
/// value become constants and `abs` of a nonnegative argument is dropped,
/// so the constructors can fold what the box already decides (for
/// instance a mutant that coincides with the original there).
fn fold(t: &Term, doms: &[Interval], w: IntWidth, memo: &mut HashMap<usize, Term>) -> Term {
    if let Some(r) = memo.get(&t.ptr_id()) {
        return r.clone();
    }
    let r = match t.node() {
        Node::Const(_) => t.clone(),
        Node::Var(v) => {
            let d = doms[v.0 as usize];
            if d.lo == d.hi {
                Term::constant(d.lo)
            } else {
                t.clone()
            }
        }
        Node::Unary(op, a) => {
            let a = fold(a, doms, w, memo);
            match op {
                UnOp::Abs if range(&a, doms, w).lo >= 0 => a,
                _ => Term::unary(*op, a, w),
            }
        }
        Node::Binary(op, a, b) => {
            let (a, b) = (fold(a, doms, w, memo), fold(b, doms, w, memo));
            Term::binary(*op, a, b, w)
        }
        Node::Ite(c, a, b) => Term::ite(fold(c, doms, w, memo), fold(a, doms, w, memo), fold(b, doms, w, memo)),
    };
    let r = match r.node() {
        Node::Const(_) | Node::Var(_) => r,
        _ => {
            let range = range(&r, doms, w);
            if range.lo == range.hi {
                Term::constant(range.lo)
            } else {
                r
            }
        }
    };
    memo.insert(t.ptr_id(), r.clone());
    r
}

impl Search {
    fn out_of_time(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes % 256 == 0 && self.start.elapsed() > self.budget {
            self.timed_out = true;
        }
        self.timed_out
    }

    /// Groups of `open` constraints linked by shared unfixed variables.
    fn components(open: Vec<(Term, Vec<VarId>)>) -> Vec<Vec<(Term, Vec<VarId>)>> {
        let mut parent: Vec<usize> = (0..open.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut owner: HashMap<VarId, usize> = HashMap::new();
        for (i, (_, vs)) in open.iter().enumerate() {
            for v in vs {
                match owner.get(v) {
                    Some(&j) => {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a] = b;
                    }
                    None => {
                        owner.insert(*v, i);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<(Term, Vec<VarId>)>> = BTreeMap::new();
        let roots: Vec<usize> = (0..open.len()).map(|i| find(&mut parent, i)).collect();
        for (c, root) in open.into_iter().zip(roots) {
            groups.entry(root).or_default().push(c);
        }
        groups.into_values().collect()
    }

    /// Finds some model of `active` within `doms`; on success every
    /// variable of `active` is a singleton in `doms`. Splits the variable
    /// shared by the most undecided constraints first.
    fn feasible(&mut self, active: &[Term], doms: &mut [Interval]) -> bool {
        if self.out_of_time() {
            return false;
        }
        if !propagate(active, doms, self.w) {
            return false;
        }
        let mut memo = HashMap::new();
        let mut open = Vec::new();
        for c in active {
            let c = fold(c, doms, self.w, &mut memo);
            match truth(range(&c, doms, self.w)) {
                Truth::True => {}
                Truth::False => return false,
                Truth::Unknown => {
                    // Folding replaced every fixed variable by its value.
                    let vs = c.vars();
                    open.push((c, vs));
                }
            }
        }
        if open.is_empty() {
            return true;
        }
        let mut groups = Self::components(open);
        if groups.len() > 1 {
            for g in groups {
                let cs: Vec<Term> = g.into_iter().map(|(c, _)| c).collect();
                if !self.feasible(&cs, doms) {
                    return false;
                }
            }
            return true;
        }
        let group = groups.pop().expect("open is nonempty");
        let mut counts: BTreeMap<VarId, usize> = BTreeMap::new();
        for v in group.iter().flat_map(|(_, vs)| vs) {
            *counts.entry(*v).or_default() += 1;
        }
        let v = counts.iter().max_by_key(|(v, n)| (**n, std::cmp::Reverse(**v))).map(|(v, _)| *v).expect("an undecided constraint mentions a variable");
        let cs: Vec<Term> = group.into_iter().map(|(c, _)| c).collect();
        let d = doms[v.0 as usize];
        let mid = d.lo + (d.hi - d.lo) / 2;
        for half in [Interval::new(d.lo, mid), Interval::new(mid + 1, d.hi)] {
            let mut child = doms.to_vec();
            child[v.0 as usize] = half;
            if self.feasible(&cs, &mut child) {
                doms.copy_from_slice(&child);
                return true;
            }
            if self.timed_out {
                return false;
            }
        }
        false
    }

    /// Model of `cs` within `doms` with unfixed variables at their lower
    /// bound, if `feasible` finds one.
    fn model(&mut self, cs: &[Term], doms: &[Interval]) -> Option<Model> {
        let mut d = doms.to_vec();
        self.feasible(cs, &mut d).then(|| d.iter().map(|i| i.lo).collect())
    }

    /// The lexicographically first model: each variable in turn is
    /// narrowed to its least value that still admits a model.
    fn first_model(&mut self, cs: &[Term], doms: &mut [Interval], constrained: &[VarId]) -> Option<Model> {
        let mut best = self.model(cs, doms)?;
        for &v in constrained {
            let i = v.0 as usize;
            let (mut lo, mut hi) = (doms[i].lo, best[i]);
            while lo < hi {
                // The bottom value first: most models sit there.
                let mid = if lo == doms[i].lo { lo } else { lo + (hi - lo - 1) / 2 };
                let mut trial = doms.to_vec();
                trial[i] = Interval::new(lo, mid);
                match self.model(cs, &trial) {
                    Some(m) => {
                        hi = m[i];
                        best = m;
                    }
                    None if self.timed_out => return None,
                    None => lo = mid + 1,
                }
            }
            doms[i] = Interval::new(hi, hi);
            best[i] = hi;
        }
        Some(best)
    }
}

pub(super) fn solve(f: &Formula, budget: Duration) -> Result<SolveResult, SolverError> {
    let table = &f.vars;
    let mut constrained = BTreeSet::new();
    for c in &f.constraints {
        for v in c.vars() {
            if v.0 as usize >= table.len() {
                return Err(SolverError::DomainMissing(format!("v{}", v.0)));
            }
            constrained.insert(v);
        }
    }
    let mut doms: Vec<Interval> = table.vars.iter().map(|v| v.domain).collect();
    let mut search = Search { w: table.width, start: Instant::now(), budget, nodes: 0, timed_out: false };
    let constrained: Vec<VarId> = constrained.into_iter().collect();
    match search.first_model(&f.constraints, &mut doms, &constrained) {
        Some(model) => {
            debug_assert!(table.in_domain(&model) && f.holds(&model));
            Ok(SolveResult::Sat(model))
        }
        None if search.timed_out => Ok(SolveResult::Timeout),
        None => Ok(SolveResult::UnsatWithinDomain),
    }
}
