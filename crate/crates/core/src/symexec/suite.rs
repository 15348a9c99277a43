//! Generated test suites and the label coverage store.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::LabelId;
use crate::semantics::TestInput;

use super::concrete::Outcome;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub inputs: TestInput,
    /// Branch string: `T`/`F` per branch, `L` for a label side branch.
    pub path: String,
    pub labels: Vec<LabelId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreStats {
    /// Explored paths: satisfiable, infeasible and timed-out leaves.
    pub paths: u64,
    pub sat: u64,
    pub unsat: u64,
    pub timeout: u64,
    pub solver_calls: u64,
    /// Label side branches whose constraint was checked.
    pub label_forks: u64,
    /// Label side branches skipped because their label was covered.
    pub pruned: u64,
    /// Most label constraints carried by a single path.
    pub max_label_constraints: u64,
    /// Longest explored path, in statement visits.
    pub max_path_len: u64,
    pub time_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSuite {
    pub entries: Vec<SuiteEntry>,
    pub stats: ExploreStats,
    /// Exploration stopped early (time budget or path cap).
    pub truncated: bool,
}

impl TestSuite {
    pub fn inputs(&self) -> Vec<TestInput> {
        self.entries.iter().map(|e| e.inputs.clone()).collect()
    }

    /// Union of the labels recorded on entries.
    pub fn claimed_labels(&self) -> BTreeSet<LabelId> {
        self.entries.iter().flat_map(|e| e.labels.iter().copied()).collect()
    }

    /// The `suite.json` document.
    pub fn to_json(&self, program: &str, criterion: &str, mode: &str, idl: u8, k: usize) -> serde_json::Value {
        let stats = &self.stats;
        serde_json::json!({
            "program": program,
            "criterion": criterion,
            "mode": mode,
            "idl": idl,
            "k": k,
            "entries": self.entries.iter().map(|e| serde_json::json!({
                "inputs": e.inputs,
                "path": e.path,
                "labels": e.labels,
            })).collect::<Vec<_>>(),
            "stats": {
                "paths": stats.paths,
                "sat": stats.sat,
                "unsat": stats.unsat,
                "timeout": stats.timeout,
                "time_ms": stats.time_ms,
            },
            "truncated": self.truncated,
        })
    }

    /// Reads the entries of a `suite.json` document.
    pub fn from_json(v: &serde_json::Value) -> Result<TestSuite, String> {
        #[derive(Deserialize)]
        struct Doc {
            entries: Vec<SuiteEntry>,
            #[serde(default)]
            truncated: bool,
        }
        let doc: Doc = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        Ok(TestSuite { entries: doc.entries, stats: ExploreStats::default(), truncated: doc.truncated })
    }
}

/// The `b_ℓ` flags of iterative label deletion. Flags only ever go from
/// unset to set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverageStore {
    covered: BTreeSet<LabelId>,
}

impl CoverageStore {
    pub fn is_covered(&self, l: LabelId) -> bool {
        self.covered.contains(&l)
    }

    /// Returns whether the flag was newly set.
    pub fn mark(&mut self, l: LabelId) -> bool {
        self.covered.insert(l)
    }

    pub fn covered(&self) -> &BTreeSet<LabelId> {
        &self.covered
    }

    pub fn len(&self) -> usize {
        self.covered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covered.is_empty()
    }
}
