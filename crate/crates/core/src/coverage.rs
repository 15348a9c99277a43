//! Label coverage: per-label checks on plain runs, single-pass scoring on
//! the hook-instrumented program, brute-force infeasibility, and the
//! weak-mutation kill oracle.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain;
use crate::frontend::ast::*;
use crate::instrument::direct_instrument;
use crate::labeling::{AnnotatedProgram, Label, Mutant, BRUTE_FORCE_LIMIT};
use crate::semantics::{holds, Store, TestInput};
use crate::symexec::{concrete_run, Machine, Outcome, RunConfig, TestSuite};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("input domain has {size} points, above the brute-force limit of {limit}")]
    DomainTooLarge { size: u128, limit: u128 },
}

/// Whether `t` covers `label` on `p`: some visit of the label's location
/// happens in a store satisfying the predicate.
pub fn covers(p: &Program, t: &TestInput, label: &Label) -> bool {
    covers_with(p, t, label, RunConfig::bounded(None))
}

/// [`covers`] under an explicit run configuration.
pub fn covers_with(p: &Program, t: &TestInput, label: &Label, cfg: RunConfig) -> bool {
    let mut m = Machine::new(p, t, cfg);
    loop {
        match m.position() {
            None => return false,
            Some(loc) if loc == label.loc && holds(&label.pred, &m.store, p.width) => return true,
            Some(_) => {}
        }
        if m.step().is_some() {
            return false;
        }
    }
}

/// All labels of `ap` that `t` covers, from a single plain run.
pub fn labels_covered_by(ap: &AnnotatedProgram, t: &TestInput, cfg: RunConfig) -> BTreeSet<LabelId> {
    let at = ap.labels_by_location();
    let w = ap.program.width;
    let mut out = BTreeSet::new();
    let mut m = Machine::new(&ap.program, t, cfg);
    while let Some(loc) = m.position() {
        for l in at.get(&loc).into_iter().flatten() {
            if !out.contains(&l.id) && holds(&l.pred, &m.store, w) {
                out.insert(l.id);
            }
        }
        if m.step().is_some() {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelStatus {
    Covered,
    Uncovered,
    /// No input of the declared domain covers the label.
    KnownInfeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCoverage {
    pub id: LabelId,
    pub status: LabelStatus,
    /// Index of the first test that covers the label.
    #[serde(default)]
    pub by_test: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub labels: Vec<LabelCoverage>,
    pub score_raw: f64,
    /// Covered over labels not known infeasible.
    pub score_adjusted: f64,
    /// Concrete runs executed.
    pub runs: usize,
}

impl CoverageReport {
    pub fn covered(&self) -> BTreeSet<LabelId> {
        self.labels.iter().filter(|l| l.status == LabelStatus::Covered).map(|l| l.id).collect()
    }

    pub fn covered_count(&self) -> usize {
        self.labels.iter().filter(|l| l.status == LabelStatus::Covered).count()
    }

    pub fn infeasible_count(&self) -> usize {
        self.labels.iter().filter(|l| l.status == LabelStatus::KnownInfeasible).count()
    }

    /// Marks uncovered labels of `infeasible` as known infeasible.
    pub fn with_infeasible(mut self, infeasible: &BTreeSet<LabelId>) -> Self {
        for l in &mut self.labels {
            if l.status == LabelStatus::Uncovered && infeasible.contains(&l.id) {
                l.status = LabelStatus::KnownInfeasible;
            }
        }
        self.rescore();
        self
    }

    fn rescore(&mut self) {
        let total = self.labels.len();
        let covered = self.covered_count();
        let feasible = total - self.infeasible_count();
        self.score_raw = ratio(covered, total);
        self.score_adjusted = ratio(covered, feasible);
    }

    /// The `coverage.json` document.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        n as f64 / d as f64
    }
}

/// Scores `ts` against `ap`, one run per test on the hook-instrumented
/// program.
pub fn lc_score(ap: &AnnotatedProgram, ts: &TestSuite) -> CoverageReport {
    lc_score_inputs(ap, &ts.inputs(), None)
}

/// [`lc_score`] over plain inputs, with runs optionally cut after `k`
/// original decisions.
pub fn lc_score_inputs(ap: &AnnotatedProgram, tests: &[TestInput], k: Option<usize>) -> CoverageReport {
    let hooked = direct_instrument(ap, true).program;
    let mut first: BTreeMap<LabelId, usize> = BTreeMap::new();
    let mut runs = 0;
    for (i, t) in tests.iter().enumerate() {
        runs += 1;
        for l in concrete_run(&hooked, t, RunConfig::bounded(k)).hooks {
            first.entry(l).or_insert(i);
        }
    }
    let labels = ap
        .labels
        .iter()
        .map(|l| match first.get(&l.id) {
            Some(&i) => LabelCoverage { id: l.id, status: LabelStatus::Covered, by_test: Some(i) },
            None => LabelCoverage { id: l.id, status: LabelStatus::Uncovered, by_test: None },
        })
        .collect();
    let mut report = CoverageReport { labels, score_raw: 0.0, score_adjusted: 0.0, runs };
    report.rescore();
    report
}

/// Labels no input of the declared domain covers, by exhaustive plain
/// runs.
pub fn infeasible_labels_bruteforce(ap: &AnnotatedProgram) -> Result<BTreeSet<LabelId>, CoverageError> {
    infeasible_labels_bounded(ap, None)
}

/// [`infeasible_labels_bruteforce`] with runs cut after `k` decisions.
pub fn infeasible_labels_bounded(ap: &AnnotatedProgram, k: Option<usize>) -> Result<BTreeSet<LabelId>, CoverageError> {
    let size = ap.program.domain_size();
    if size > BRUTE_FORCE_LIMIT {
        return Err(CoverageError::DomainTooLarge { size, limit: BRUTE_FORCE_LIMIT });
    }
    let mut open: BTreeSet<LabelId> = ap.labels.iter().map(|l| l.id).collect();
    for t in domain::inputs(&ap.program) {
        if open.is_empty() {
            break;
        }
        for l in labels_covered_by(ap, &t, RunConfig::bounded(k)) {
            open.remove(&l);
        }
    }
    Ok(open)
}

/// Observable state right after a step: store without temporaries, the
/// branch string so far, and where control goes next. Runtime errors are
/// not distinguished from one another.
#[derive(PartialEq, Eq)]
enum After {
    Running(Store, String, LocationId),
    Ended(Store, String, Outcome),
    Trapped,
}

fn after(m: &mut Machine<'_>) -> After {
    match m.position() {
        Some(loc) => After::Running(m.store.without_temporaries(), m.path.clone(), loc),
        None => match m.outcome.clone().expect("ended run has an outcome") {
            Outcome::RuntimeError { .. } => After::Trapped,
            o => After::Ended(m.store.without_temporaries(), m.path.clone(), o),
        },
    }
}

/// Whether `t` weakly kills `m`: running the original and the mutant in
/// lockstep, their states differ right after some execution of the
/// mutated location.
pub fn wm_kill_oracle(p: &Program, m: &Mutant, t: &TestInput) -> bool {
    let mutated = m.program();
    let cfg = RunConfig::bounded(None);
    let mut orig = Machine::new(p, t, cfg);
    let mut mutant = Machine::new(&mutated, t, cfg);
    loop {
        let Some(loc) = orig.position() else { return false };
        let done = orig.step().is_some();
        mutant.step();
        if loc == m.loc && after(&mut orig) != after(&mut mutant) {
            return true;
        }
        if done {
            return false;
        }
    }
}
