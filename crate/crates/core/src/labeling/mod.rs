//! Labelling functions: map a program to an annotated program whose labels
//! emulate a coverage criterion.

pub mod mutation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain;
use crate::frontend::ast::*;
use crate::frontend::check::{scopes_at_locations, VarKind};
use crate::frontend::{atomic_conditions, expr_to_string, parse_expr, FrontendError};
use crate::semantics::{holds, Store};

pub use mutation::{generate_mutants, Mutant, MutationKind, MutationOperator};

/// Largest number of atoms a condition may have under MCC.
pub const MCC_MAX_ATOMS: usize = 16;

/// Input domains larger than this are not brute-forced.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Ic,
    Dc,
    Cc,
    Dcc,
    Mcc,
    Wm,
    Idp,
    Rte,
    /// Labels written in the source as `//@label` pragmas.
    Pragma,
}

impl Criterion {
    pub const ALL: [Criterion; 9] = [
        Criterion::Ic,
        Criterion::Dc,
        Criterion::Cc,
        Criterion::Dcc,
        Criterion::Mcc,
        Criterion::Wm,
        Criterion::Idp,
        Criterion::Rte,
        Criterion::Pragma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Ic => "ic",
            Criterion::Dc => "dc",
            Criterion::Cc => "cc",
            Criterion::Dcc => "dcc",
            Criterion::Mcc => "mcc",
            Criterion::Wm => "wm",
            Criterion::Idp => "idp",
            Criterion::Rte => "rte",
            Criterion::Pragma => "pragma",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown criterion `{s}`"))
    }
}

/// Where a label comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub criterion: Criterion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<MutationOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutant: Option<u32>,
}

impl Origin {
    pub fn of(criterion: Criterion) -> Self {
        Origin { criterion, operator: None, mutant: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Label {
    pub id: LabelId,
    pub loc: LocationId,
    pub pred: Expr,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedProgram {
    pub program: Program,
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("condition at {loc} has {atoms} atoms; MCC supports at most {MCC_MAX_ATOMS}")]
    MccTooLarge { loc: LocationId, atoms: usize },
    #[error("mutant {mutant} at {loc} involves a side effect")]
    SideEffectRejected { mutant: u32, loc: LocationId },
    #[error("partition predicate `{pred}` reads `{name}`, which is not an input")]
    NotAnInput { pred: String, name: String },
    #[error("program has no statement to attach entry labels to")]
    NoEntry,
    #[error("label {id} at {loc} is ill-formed: {reason}")]
    IllFormed { id: LabelId, loc: LocationId, reason: String },
    #[error("labels file: {0}")]
    Json(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelWarning {
    /// Two partition predicates hold together on `witness`.
    NonDisjointPartition { first: usize, second: usize, witness: crate::semantics::TestInput },
    /// The input domain was too large to check disjointness.
    PartitionUnchecked,
}

impl fmt::Display for LabelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelWarning::NonDisjointPartition { first, second, witness } => {
                let w: Vec<String> = witness.iter().map(|(k, v)| format!("{k}={}", serde_json::to_string(v).unwrap())).collect();
                write!(f, "partition predicates {first} and {second} overlap (e.g. {})", w.join(", "))
            }
            LabelWarning::PartitionUnchecked => f.write_str("input domain too large to check partition disjointness"),
        }
    }
}

impl AnnotatedProgram {
    pub fn unlabeled(program: Program) -> Self {
        AnnotatedProgram { program, labels: Vec::new() }
    }

    fn from_raw(program: &Program, raw: Vec<(LocationId, Expr, Origin)>) -> Self {
        let labels = raw
            .into_iter()
            .enumerate()
            .map(|(i, (loc, pred, origin))| Label { id: LabelId(i as u32), loc, pred, origin })
            .collect();
        AnnotatedProgram { program: program.clone(), labels }
    }

    pub fn label(&self, id: LabelId) -> Option<&Label> {
        self.labels.get(id.0 as usize).filter(|l| l.id == id).or_else(|| self.labels.iter().find(|l| l.id == id))
    }

    /// Checks that every label sits at an executable location, reads only
    /// variables in scope there, and is side-effect free.
    pub fn validate(&self) -> Result<(), LabelError> {
        let scopes = scopes_at_locations(&self.program);
        for l in &self.labels {
            let bad = |reason: String| LabelError::IllFormed { id: l.id, loc: l.loc, reason };
            let stmt = self.program.stmt(l.loc).ok_or_else(|| bad("no such location".into()))?;
            if matches!(stmt.kind, StmtKind::LabelPragma(_)) || stmt.kind.is_instrumentation() {
                return Err(bad("location is not an executable program statement".into()));
            }
            if l.pred.has_side_effects() {
                return Err(bad("predicate has side effects".into()));
            }
            let scope = &scopes[&l.loc];
            let mut err = None;
            l.pred.visit_names(&mut |name, is_array| {
                let ok = matches!((scope.get(name), is_array), (Some(VarKind::Scalar), false) | (Some(VarKind::Array(_)), true));
                if !ok && err.is_none() {
                    err = Some(format!("`{name}` is not in scope"));
                }
            });
            if let Some(reason) = err {
                return Err(bad(reason));
            }
        }
        Ok(())
    }

    /// Serializes the labels as a `labels.json` array.
    pub fn labels_json(&self) -> serde_json::Value {
        serde_json::to_value(self.labels.iter().map(LabelRecord::from).collect::<Vec<_>>()).expect("labels serialize")
    }

    /// Reads labels written by [`AnnotatedProgram::labels_json`].
    pub fn with_labels_json(program: Program, json: &str) -> Result<Self, LabelError> {
        let records: Vec<LabelRecord> = serde_json::from_str(json).map_err(|e| LabelError::Json(e.to_string()))?;
        let labels = records
            .into_iter()
            .map(|r| {
                Ok(Label { id: r.id, loc: r.loc, pred: parse_expr(&r.pred, true)?, origin: r.origin })
            })
            .collect::<Result<Vec<_>, LabelError>>()?;
        let ap = AnnotatedProgram { program, labels };
        ap.validate()?;
        Ok(ap)
    }

    /// Label ids per location, ascending.
    pub fn labels_by_location(&self) -> BTreeMap<LocationId, Vec<&Label>> {
        let mut out: BTreeMap<LocationId, Vec<&Label>> = BTreeMap::new();
        for l in &self.labels {
            out.entry(l.loc).or_default().push(l);
        }
        for v in out.values_mut() {
            v.sort_by_key(|l| l.id);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: LabelId,
    pub loc: LocationId,
    pub pred: String,
    pub origin: Origin,
}

impl From<&Label> for LabelRecord {
    fn from(l: &Label) -> Self {
        LabelRecord { id: l.id, loc: l.loc, pred: expr_to_string(&l.pred), origin: l.origin.clone() }
    }
}

fn branching(p: &Program) -> Vec<(LocationId, &Expr)> {
    p.statements().into_iter().filter_map(|s| s.kind.condition().map(|c| (s.loc, c))).collect()
}

/// Instruction coverage: `(loc, true)` for every executable statement.
pub fn label_ic(p: &Program) -> AnnotatedProgram {
    let raw = p
        .statements()
        .into_iter()
        .filter(|s| !matches!(s.kind, StmtKind::LabelPragma(_)))
        .map(|s| (s.loc, Expr::Bool(true), Origin::of(Criterion::Ic)))
        .collect();
    AnnotatedProgram::from_raw(p, raw)
}

fn dc_labels(loc: LocationId, cond: &Expr, criterion: Criterion) -> Vec<(LocationId, Expr, Origin)> {
    vec![
        (loc, cond.clone(), Origin::of(criterion)),
        (loc, Expr::not(cond.clone()), Origin::of(criterion)),
    ]
}

fn cc_labels(loc: LocationId, cond: &Expr, criterion: Criterion) -> Vec<(LocationId, Expr, Origin)> {
    atomic_conditions(cond).into_iter().flat_map(|a| dc_labels(loc, &a, criterion)).collect()
}

/// Decision coverage: both outcomes of every `if`/`while` condition.
pub fn label_dc(p: &Program) -> AnnotatedProgram {
    let raw = branching(p).into_iter().flat_map(|(loc, c)| dc_labels(loc, c, Criterion::Dc)).collect();
    AnnotatedProgram::from_raw(p, raw)
}

/// Condition coverage: both outcomes of every atomic condition.
pub fn label_cc(p: &Program) -> AnnotatedProgram {
    let raw = branching(p).into_iter().flat_map(|(loc, c)| cc_labels(loc, c, Criterion::Cc)).collect();
    AnnotatedProgram::from_raw(p, raw)
}

/// Decision/condition coverage, dropping syntactic duplicates per location.
pub fn label_dcc(p: &Program) -> AnnotatedProgram {
    let mut seen = BTreeSet::new();
    let mut raw = Vec::new();
    for (loc, c) in branching(p) {
        for item in dc_labels(loc, c, Criterion::Dcc).into_iter().chain(cc_labels(loc, c, Criterion::Dcc)) {
            if seen.insert((loc, expr_to_string(&item.1))) {
                raw.push(item);
            }
        }
    }
    AnnotatedProgram::from_raw(p, raw)
}

/// Multiple condition coverage: every combination of atom outcomes. The
/// first atom is the most significant; positive literals come first.
pub fn label_mcc(p: &Program) -> Result<AnnotatedProgram, LabelError> {
    let mut raw = Vec::new();
    for (loc, c) in branching(p) {
        let atoms = atomic_conditions(c);
        let n = atoms.len();
        if n > MCC_MAX_ATOMS {
            return Err(LabelError::MccTooLarge { loc, atoms: n });
        }
        for combo in 0u32..(1 << n) {
            let lits = atoms.iter().enumerate().map(|(j, a)| {
                if combo >> (n - 1 - j) & 1 == 0 {
                    a.clone()
                } else {
                    Expr::not(a.clone())
                }
            });
            raw.push((loc, Expr::and_all(lits), Origin::of(Criterion::Mcc)));
        }
    }
    Ok(AnnotatedProgram::from_raw(p, raw))
}

/// Labels from `//@label` pragmas, placed at the next statement.
pub fn label_pragmas(p: &Program) -> AnnotatedProgram {
    fn go(stmts: &[Stmt], raw: &mut Vec<(LocationId, Expr, Origin)>) {
        let mut pending = Vec::new();
        for s in stmts {
            match &s.kind {
                StmtKind::LabelPragma(pred) => pending.push(pred.clone()),
                _ => {
                    for pred in pending.drain(..) {
                        raw.push((s.loc, pred, Origin::of(Criterion::Pragma)));
                    }
                }
            }
            for child in s.children() {
                go(child, raw);
            }
        }
    }
    let mut raw = Vec::new();
    go(&p.body, &mut raw);
    raw.sort_by_key(|(loc, _, _)| *loc);
    AnnotatedProgram::from_raw(p, raw)
}

/// Input-domain partition labels at the entry location. Overlapping
/// predicates are reported but still emitted.
pub fn label_idp(p: &Program, partition: &[Expr]) -> Result<(AnnotatedProgram, Vec<LabelWarning>), LabelError> {
    if partition.is_empty() {
        return Ok((AnnotatedProgram::unlabeled(p.clone()), Vec::new()));
    }
    for pred in partition {
        let mut bad = None;
        pred.visit_names(&mut |name, is_array| {
            let ok = match p.param(name) {
                Some(param) => matches!(param.ty, ParamType::Array(_)) == is_array,
                None => false,
            };
            if !ok && bad.is_none() {
                bad = Some(name.to_string());
            }
        });
        if let Some(name) = bad {
            return Err(LabelError::NotAnInput { pred: expr_to_string(pred), name });
        }
        if pred.has_side_effects() {
            return Err(LabelError::IllFormed { id: LabelId(0), loc: LocationId(0), reason: "predicate has side effects".into() });
        }
    }
    let entry = p.entry_location().ok_or(LabelError::NoEntry)?;
    let raw = partition.iter().map(|e| (entry, e.clone(), Origin::of(Criterion::Idp))).collect();
    let ap = AnnotatedProgram::from_raw(p, raw);

    let mut warnings = Vec::new();
    if p.domain_size() > BRUTE_FORCE_LIMIT {
        warnings.push(LabelWarning::PartitionUnchecked);
        return Ok((ap, warnings));
    }
    let mut reported = BTreeSet::new();
    for input in domain::inputs(p) {
        let store = Store::from_input(&input);
        let hits: Vec<usize> = partition.iter().enumerate().filter(|(_, e)| holds(e, &store, p.width)).map(|(i, _)| i).collect();
        for (a, &i) in hits.iter().enumerate() {
            for &j in &hits[a + 1..] {
                if reported.insert((i, j)) {
                    warnings.push(LabelWarning::NonDisjointPartition { first: i, second: j, witness: input.clone() });
                }
            }
        }
    }
    Ok((ap, warnings))
}

/// Array accesses and divisors of `e` in pre-order.
fn rte_hazards(e: &Expr, sizes: &BTreeMap<String, VarKind>, out: &mut Vec<Expr>) {
    match e {
        Expr::Binary(op @ (BinOp::Div | BinOp::Rem), l, r) => {
            let _ = op;
            out.push(Expr::binary(BinOp::Eq, (**r).clone(), Expr::Int(0)));
            rte_hazards(l, sizes, out);
            rte_hazards(r, sizes, out);
        }
        Expr::Binary(_, l, r) => {
            rte_hazards(l, sizes, out);
            rte_hazards(r, sizes, out);
        }
        Expr::Index(name, idx) => {
            out.push(out_of_bounds(idx, sizes, name));
            rte_hazards(idx, sizes, out);
        }
        Expr::Unary(_, inner) => rte_hazards(inner, sizes, out),
        _ => {}
    }
}

fn out_of_bounds(idx: &Expr, sizes: &BTreeMap<String, VarKind>, name: &str) -> Expr {
    let n = match sizes.get(name) {
        Some(VarKind::Array(n)) => *n as i64,
        _ => 0,
    };
    Expr::binary(
        BinOp::Or,
        Expr::binary(BinOp::Lt, idx.clone(), Expr::Int(0)),
        Expr::binary(BinOp::Ge, idx.clone(), Expr::Int(n)),
    )
}

/// Run-time error labels: `d == 0` per division or remainder and
/// `i < 0 || i >= n` per array access.
pub fn label_rte(p: &Program) -> AnnotatedProgram {
    let scopes = scopes_at_locations(p);
    let mut raw = Vec::new();
    for s in p.statements() {
        let sizes = &scopes[&s.loc];
        let mut hazards = Vec::new();
        match &s.kind {
            StmtKind::Decl { init: e, .. } | StmtKind::Return(e) => rte_hazards(e, sizes, &mut hazards),
            StmtKind::If { cond: e, .. } | StmtKind::While { cond: e, .. } => rte_hazards(e, sizes, &mut hazards),
            StmtKind::Assign { lhs, rhs } => {
                if let Lvalue::Index(name, idx) = lhs {
                    hazards.push(out_of_bounds(idx, sizes, name));
                    rte_hazards(idx, sizes, &mut hazards);
                }
                rte_hazards(rhs, sizes, &mut hazards);
            }
            _ => {}
        }
        raw.extend(hazards.into_iter().map(|h| (s.loc, h, Origin::of(Criterion::Rte))));
    }
    AnnotatedProgram::from_raw(p, raw)
}

/// Predicate that holds exactly when evaluating `e` does not trap, honouring
/// short-circuit evaluation. Never traps itself.
pub fn definedness(e: &Expr, sizes: &BTreeMap<String, VarKind>) -> Expr {
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) | Expr::PostInc(_) | Expr::PostDec(_) => Expr::Bool(true),
        Expr::Index(name, idx) => Expr::and(definedness(idx, sizes), Expr::not(out_of_bounds(idx, sizes, name))),
        Expr::Unary(_, inner) => definedness(inner, sizes),
        Expr::Binary(BinOp::And, l, r) => {
            Expr::and(definedness(l, sizes), guarded(Expr::not((**l).clone()), definedness(r, sizes)))
        }
        Expr::Binary(BinOp::Or, l, r) => Expr::and(definedness(l, sizes), guarded((**l).clone(), definedness(r, sizes))),
        Expr::Binary(op, l, r) => {
            let both = Expr::and(definedness(l, sizes), definedness(r, sizes));
            if matches!(op, BinOp::Div | BinOp::Rem) {
                Expr::and(both, Expr::binary(BinOp::Ne, (**r).clone(), Expr::Int(0)))
            } else {
                both
            }
        }
    }
}

/// `skip || d`, simplified when `d` is trivially true.
fn guarded(skip: Expr, d: Expr) -> Expr {
    match d {
        Expr::Bool(true) => Expr::Bool(true),
        d => Expr::or(skip, d),
    }
}

/// `old` and `new` evaluate differently: different values, or exactly one
/// of them traps. `differ` compares two defined values.
fn outcome_differs(def_old: Expr, def_new: Expr, differ: Expr) -> Expr {
    if def_old == Expr::Bool(true) && def_new == Expr::Bool(true) {
        return differ;
    }
    let both = Expr::and(Expr::and(def_old.clone(), def_new.clone()), differ);
    let one_traps = match (def_old, def_new) {
        (Expr::Bool(true), d) | (d, Expr::Bool(true)) => Expr::not(d),
        (a, b) => Expr::binary(BinOp::Ne, a, b),
    };
    Expr::or(both, one_traps)
}

/// The weak-mutation label predicate of a mutant: it holds in a store
/// exactly when executing the mutated statement there leads to a different
/// state than executing the original one.
pub fn wm_predicate(m: &Mutant, sizes: &BTreeMap<String, VarKind>) -> Expr {
    let stmt = m.base.stmt(m.loc).expect("mutated location exists");
    match &m.kind {
        MutationKind::CondMut { old, new } => outcome_differs(
            definedness(old, sizes),
            definedness(new, sizes),
            Expr::binary(BinOp::Xor, old.clone(), new.clone()),
        ),
        MutationKind::ExprMut { old, new } => {
            let target_ok = match &stmt.kind {
                StmtKind::Assign { lhs: Lvalue::Index(name, idx), .. } => {
                    Expr::and(definedness(idx, sizes), Expr::not(out_of_bounds(idx, sizes, name)))
                }
                _ => Expr::Bool(true),
            };
            let differs = outcome_differs(
                definedness(old, sizes),
                definedness(new, sizes),
                Expr::binary(BinOp::Ne, old.clone(), new.clone()),
            );
            Expr::and(target_ok, differs)
        }
        MutationKind::LhsMut { old, new } => {
            let StmtKind::Assign { rhs, .. } = &stmt.kind else { unreachable!("lhs mutant on a non-assignment") };
            let target_def = |lv: &Lvalue| match lv {
                Lvalue::Var(_) => Expr::Bool(true),
                Lvalue::Index(name, idx) => Expr::and(definedness(idx, sizes), Expr::not(out_of_bounds(idx, sizes, name))),
            };
            let distinct = match (old, new) {
                (Lvalue::Index(a, i), Lvalue::Index(b, j)) if a == b => Expr::binary(BinOp::Ne, i.clone(), j.clone()),
                (a, b) => Expr::Bool(a.name() != b.name()),
            };
            let writes_matter = Expr::or(
                Expr::binary(BinOp::Ne, old.as_expr(), rhs.clone()),
                Expr::binary(BinOp::Ne, new.as_expr(), rhs.clone()),
            );
            let differs = outcome_differs(target_def(old), target_def(new), Expr::and(distinct, writes_matter));
            Expr::and(definedness(rhs, sizes), differs)
        }
    }
}

/// Weak-mutation labels, one per mutant, in mutant order.
pub fn label_wm(p: &Program, mutants: &[Mutant]) -> Result<AnnotatedProgram, LabelError> {
    let scopes = scopes_at_locations(p);
    let mut raw = Vec::with_capacity(mutants.len());
    for m in mutants {
        if m.has_side_effects() {
            return Err(LabelError::SideEffectRejected { mutant: m.id, loc: m.loc });
        }
        let origin = Origin { criterion: Criterion::Wm, operator: Some(m.operator), mutant: Some(m.id) };
        raw.push((m.loc, wm_predicate(m, &scopes[&m.loc]), origin));
    }
    Ok(AnnotatedProgram::from_raw(p, raw))
}

/// Options for [`annotate`].
#[derive(Debug, Clone, Default)]
pub struct AnnotateOptions {
    /// Operators for `wm`; all operators when empty.
    pub wm_ops: Vec<MutationOperator>,
    /// Predicates for `idp`.
    pub partition: Vec<Expr>,
}

/// Applies the labelling function of `criterion`.
pub fn annotate(
    p: &Program,
    criterion: Criterion,
    opts: &AnnotateOptions,
) -> Result<(AnnotatedProgram, Vec<LabelWarning>), LabelError> {
    let ap = match criterion {
        Criterion::Ic => label_ic(p),
        Criterion::Dc => label_dc(p),
        Criterion::Cc => label_cc(p),
        Criterion::Dcc => label_dcc(p),
        Criterion::Mcc => label_mcc(p)?,
        Criterion::Rte => label_rte(p),
        Criterion::Pragma => label_pragmas(p),
        Criterion::Wm => {
            let ops = if opts.wm_ops.is_empty() { MutationOperator::ALL.to_vec() } else { opts.wm_ops.clone() };
            label_wm(p, &generate_mutants(p, &ops))?
        }
        Criterion::Idp => return label_idp(p, &opts.partition),
    };
    Ok((ap, Vec::new()))
}
