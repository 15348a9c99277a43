use std::sync::Arc;

use labelc_core::coverage::lc_score_inputs;
use labelc_core::domain;
use labelc_core::frontend::ast::{BinOp, UnOp};
use labelc_core::solver::{Term, VarId, VarTable, DEFAULT_BUDGET};
use labelc_core::symexec::{concrete_run, count_paths, explore, CoverageStore, ExploreConfig, RunConfig};
use labelc_core::{corpus, direct_instrument, parse, solve, tight_instrument, Criterion, Formula, LabelId, SolveResult};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Arith {
    Var(u32),
    Const(i64),
    Bin(BinOp, Box<Arith>, Box<Arith>),
    Un(UnOp, Box<Arith>),
}

#[derive(Debug, Clone)]
enum Cond {
    Rel(BinOp, Arith, Arith),
    Conn(BinOp, Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

fn arith() -> impl Strategy<Value = Arith> {
    let leaf = prop_oneof![(0u32..3).prop_map(Arith::Var), (-6i64..=6).prop_map(Arith::Const)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem]), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Arith::Bin(op, Box::new(a), Box::new(b))),
            (prop::sample::select(vec![UnOp::Neg, UnOp::Abs]), inner).prop_map(|(op, a)| Arith::Un(op, Box::new(a))),
        ]
    })
}

fn cond() -> impl Strategy<Value = Cond> {
    let rel = prop::sample::select(vec![BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge]);
    let leaf = (rel, arith(), arith()).prop_map(|(op, a, b)| Cond::Rel(op, a, b));
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![BinOp::And, BinOp::Or, BinOp::Xor]), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Cond::Conn(op, Box::new(a), Box::new(b))),
            inner.prop_map(|c| Cond::Not(Box::new(c))),
        ]
    })
}

fn table() -> Arc<VarTable> {
    let p = parse("fn f(x: int in [-5, 5], y: int in [-5, 5], z: int in [-5, 5]) { return 0; }").unwrap();
    Arc::new(VarTable::from_program(&p))
}

fn arith_term(a: &Arith, t: &VarTable) -> Term {
    match a {
        Arith::Var(v) => Term::var(VarId(*v)),
        Arith::Const(c) => Term::constant(*c),
        Arith::Bin(op, l, r) => Term::binary(*op, arith_term(l, t), arith_term(r, t), t.width),
        Arith::Un(op, e) => Term::unary(*op, arith_term(e, t), t.width),
    }
}

fn cond_term(c: &Cond, t: &VarTable) -> Term {
    match c {
        Cond::Rel(op, a, b) => Term::binary(*op, arith_term(a, t), arith_term(b, t), t.width),
        Cond::Conn(op, a, b) => Term::binary(*op, cond_term(a, t), cond_term(b, t), t.width),
        Cond::Not(a) => Term::not(cond_term(a, t), t.width),
    }
}

/// First model in lexicographic order, by enumeration.
fn brute_first(f: &Formula) -> Option<Vec<i64>> {
    let (x, y, z) = (&f.vars.vars[0].domain, &f.vars.vars[1].domain, &f.vars.vars[2].domain);
    for a in x.lo..=x.hi {
        for b in y.lo..=y.hi {
            for c in z.lo..=z.hi {
                let m = vec![a, b, c];
                if f.holds(&m) {
                    return Some(m);
                }
            }
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_enumeration(cs in prop::collection::vec(cond(), 1..4)) {
        let vars = table();
        let f = Formula { constraints: cs.iter().map(|c| cond_term(c, &vars)).collect(), vars: vars.clone() };
        match solve(&f, DEFAULT_BUDGET).unwrap() {
            SolveResult::Sat(m) => {
                prop_assert!(vars.in_domain(&m) && f.holds(&m));
                prop_assert_eq!(Some(m), brute_first(&f));
            }
            SolveResult::UnsatWithinDomain => prop_assert_eq!(brute_first(&f), None),
            SolveResult::Timeout => prop_assert!(false, "timeout on a 3-variable formula"),
        }
    }

    #[test]
    fn coverage_store_only_grows(marks in prop::collection::vec(0u32..20, 0..60)) {
        let mut store = CoverageStore::default();
        let mut seen = std::collections::BTreeSet::new();
        for m in marks {
            let before = store.covered().clone();
            let fresh = store.mark(LabelId(m));
            prop_assert_eq!(fresh, seen.insert(m));
            prop_assert!(before.is_subset(store.covered()));
            prop_assert!(store.is_covered(LabelId(m)));
        }
        prop_assert_eq!(store.len(), seen.len());
    }

    #[test]
    fn normalization_preserves_outcomes(idx in 0usize..15, seed in any::<u64>()) {
        let all = corpus::all();
        let c = &all[idx % all.len()];
        let raw = parse(c.source).unwrap();
        let inputs: Vec<_> = domain::inputs(&c.program).step_by(1 + (seed % 97) as usize).take(40).collect();
        for t in inputs {
            let a = concrete_run(&raw, &t, RunConfig::default()).outcome;
            let b = concrete_run(&c.program, &t, RunConfig::default()).outcome;
            prop_assert_eq!(a, b, "{} on {:?}", c.name, t);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exploration_is_deterministic_and_replays(name in prop::sample::select(vec!["fig2", "clamp", "leapyear", "safediv", "sumloop", "maxindex"]),
                                               crit in prop::sample::select(vec![Criterion::Dc, Criterion::Cc, Criterion::Mcc, Criterion::Wm]),
                                               k in 1usize..8) {
        let c = corpus::get(name).unwrap();
        let ap = c.annotate(crit).unwrap();
        let cfg = ExploreConfig::with_k(k);
        let tight = tight_instrument(&ap).program;
        let a = explore(&tight, cfg);
        let b = explore(&tight, cfg);
        prop_assert_eq!(&a.entries, &b.entries);
        prop_assert_eq!(a.stats.paths, b.stats.paths);
        // Labels a test claims are covered when it is replayed.
        let replayed = lc_score_inputs(&ap, &a.inputs(), Some(k)).covered();
        prop_assert!(a.claimed_labels().is_subset(&replayed));
        // Both instrumentations reach the same labels.
        let direct = explore(&direct_instrument(&ap, false).program, cfg);
        prop_assert_eq!(lc_score_inputs(&ap, &direct.inputs(), Some(k)).covered(), replayed);
        prop_assert!(a.stats.paths <= direct.stats.paths);
    }

    #[test]
    fn count_paths_grows_with_k(name in prop::sample::select(vec!["trityp", "sumloop", "maxindex", "utf8_3"]), k in 0usize..12) {
        let c = corpus::get(name).unwrap();
        prop_assert!(count_paths(&c.program, k) <= count_paths(&c.program, k + 1));
        let ap = c.annotate(Criterion::Cc).unwrap();
        let plain = count_paths(&ap.program, k);
        prop_assert!(plain <= count_paths(&tight_instrument(&ap).program, k));
        prop_assert!(count_paths(&tight_instrument(&ap).program, k) <= count_paths(&direct_instrument(&ap, false).program, k));
    }
}
