//! Source-to-source instrumentation of annotated programs.
//!
//! Original statements keep their location ids; inserted constructs get
//! fresh ids above the original range. A label attached to a `while` is
//! evaluated at every test of the loop condition, so its construct is
//! emitted before the loop and again at the end of the loop body.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;
use crate::labeling::{AnnotatedProgram, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `if (p) {}` per label.
    Direct,
    /// `if (p) { __cover(id); }` per label.
    Hooks,
    /// `if (__nondet) { __assert(p); __exit; }` per label.
    Tight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrumentedProgram {
    pub program: Program,
    pub mode: Mode,
    /// First inserted construct of each label.
    pub guard_map: BTreeMap<LabelId, LocationId>,
}

struct Inserter<'a> {
    by_loc: BTreeMap<LocationId, Vec<&'a Label>>,
    mode: Mode,
    next_loc: u32,
    guard_map: BTreeMap<LabelId, LocationId>,
}

impl Inserter<'_> {
    fn fresh(&mut self, kind: StmtKind) -> Stmt {
        let loc = LocationId(self.next_loc);
        self.next_loc += 1;
        Stmt { loc, line: 0, kind }
    }

    fn constructs(&mut self, loc: LocationId, line: u32) -> Vec<Stmt> {
        let labels: Vec<Label> = self.by_loc.get(&loc).map(|v| v.iter().map(|l| (*l).clone()).collect()).unwrap_or_default();
        let mut out = Vec::new();
        for l in labels {
            let kind = match self.mode {
                Mode::Direct => StmtKind::Guard { label: l.id, pred: l.pred.clone(), body: vec![] },
                Mode::Hooks => {
                    let hook = self.fresh(StmtKind::CoverHook(l.id));
                    StmtKind::Guard { label: l.id, pred: l.pred.clone(), body: vec![hook] }
                }
                Mode::Tight => {
                    let assert = self.fresh(StmtKind::Assert(l.pred.clone()));
                    let exit = self.fresh(StmtKind::Exit(l.id));
                    StmtKind::NondetIf { label: l.id, body: vec![assert, exit] }
                }
            };
            let mut s = self.fresh(kind);
            s.line = line;
            self.guard_map.entry(l.id).or_insert(s.loc);
            out.push(s);
        }
        out
    }

    fn block(&mut self, stmts: &[Stmt]) -> Vec<Stmt> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            out.extend(self.constructs(s.loc, s.line));
            let mut s = s.clone();
            match &mut s.kind {
                StmtKind::If { then_block, else_block, .. } => {
                    *then_block = self.block(then_block);
                    *else_block = self.block(else_block);
                }
                StmtKind::While { body, .. } => {
                    let mut new_body = self.block(body);
                    new_body.extend(self.constructs(s.loc, s.line));
                    *body = new_body;
                }
                _ => {}
            }
            out.push(s);
        }
        out
    }
}

fn instrument(ap: &AnnotatedProgram, mode: Mode) -> InstrumentedProgram {
    let next_loc = {
        let mut max = 0;
        ap.program.walk(&mut |s| max = max.max(s.loc.0 + 1));
        max
    };
    let by_loc = ap.labels_by_location();
    let mut ins = Inserter { by_loc, mode, next_loc, guard_map: BTreeMap::new() };
    let body = ins.block(&ap.program.body);
    InstrumentedProgram { program: Program { body, ..ap.program.clone() }, mode, guard_map: ins.guard_map }
}

/// Direct instrumentation P′; with `hooks`, each guard's then-branch
/// records its label in the coverage store.
pub fn direct_instrument(ap: &AnnotatedProgram, hooks: bool) -> InstrumentedProgram {
    instrument(ap, if hooks { Mode::Hooks } else { Mode::Direct })
}

/// Tight instrumentation P★.
pub fn tight_instrument(ap: &AnnotatedProgram) -> InstrumentedProgram {
    instrument(ap, Mode::Tight)
}

/// Removes every inserted construct.
pub fn strip(p: &Program) -> Program {
    fn go(stmts: &[Stmt]) -> Vec<Stmt> {
        stmts
            .iter()
            .filter(|s| !s.kind.is_instrumentation())
            .map(|s| {
                let mut s = s.clone();
                match &mut s.kind {
                    StmtKind::If { then_block, else_block, .. } => {
                        *then_block = go(then_block);
                        *else_block = go(else_block);
                    }
                    StmtKind::While { body, .. } => *body = go(body),
                    _ => {}
                }
                s
            })
            .collect()
    }
    Program { body: go(&p.body), ..p.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_expr, program_to_string};
    use crate::labeling::{label_dc, label_ic, Criterion, Origin};

    fn one_label(src: &str, loc: u32, pred: &str) -> AnnotatedProgram {
        let p = parse(src).unwrap();
        AnnotatedProgram {
            program: p,
            labels: vec![Label {
                id: LabelId(0),
                loc: LocationId(loc),
                pred: parse_expr(pred, false).unwrap(),
                origin: Origin::of(Criterion::Pragma),
            }],
        }
    }

    #[test]
    fn direct_guard_before_statement() {
        let ap = one_label("fn f(x: int in [0, 3]) { x = 1; x = 2; }", 1, "x > 0");
        let text = program_to_string(&direct_instrument(&ap, false).program);
        assert_eq!(text, "fn f(x: int in [0, 3]) {\n  x = 1;\n  if (x > 0) {} // l0\n  x = 2;\n}\n");
        let text = program_to_string(&tight_instrument(&ap).program);
        assert_eq!(
            text,
            "fn f(x: int in [0, 3]) {\n  x = 1;\n  if (__nondet) { // l0\n    __assert(x > 0);\n    __exit;\n  }\n  x = 2;\n}\n"
        );
    }

    #[test]
    fn no_labels_is_identity() {
        let p = parse("fn f(x: int) { if (x > 0) { x = 1; } }").unwrap();
        let ap = AnnotatedProgram::unlabeled(p.clone());
        assert_eq!(direct_instrument(&ap, true).program, p);
        assert_eq!(tight_instrument(&ap).program, p);
    }

    #[test]
    fn strip_round_trips() {
        let p = parse("fn f(x: int) { while (x > 0) { x = x - 1; } if (x == 0) { x = 5; } return x; }").unwrap();
        for ap in [label_dc(&p), label_ic(&p)] {
            assert_eq!(strip(&direct_instrument(&ap, false).program), p);
            assert_eq!(strip(&direct_instrument(&ap, true).program), p);
            assert_eq!(strip(&tight_instrument(&ap).program), p);
            let ip = tight_instrument(&ap);
            assert_eq!(ip.guard_map.len(), ap.labels.len());
        }
        assert_eq!(strip(&p), p);
    }

    #[test]
    fn co_located_labels_chain_in_id_order() {
        let p = parse("fn f(x: int) { if (x > 0) { x = 1; } }").unwrap();
        let ap = label_dc(&p);
        let ip = direct_instrument(&ap, false);
        let labels: Vec<LabelId> = ip
            .program
            .body
            .iter()
            .filter_map(|s| match s.kind {
                StmtKind::Guard { label, .. } => Some(label),
                _ => None,
            })
            .collect();
        assert_eq!(labels, [LabelId(0), LabelId(1)]);
    }

    #[test]
    fn loop_labels_repeat_at_body_end() {
        let p = parse("fn f(x: int) { while (x > 0) { x = x - 1; } }").unwrap();
        let ip = direct_instrument(&label_dc(&p), false);
        let StmtKind::While { body, .. } = &ip.program.body[2].kind else { panic!() };
        assert_eq!(body.len(), 3);
        assert!(matches!(body[1].kind, StmtKind::Guard { label: LabelId(0), .. }));
    }
}
