//! Satisfiability of quantifier-free path predicates over fixed-width
//! integers, relative to the declared input domains.

pub mod interval;
mod search;
pub mod simplify;
pub mod term;

use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

pub use simplify::simplify;
pub use term::{Model, Node, Term, VarId, VarInfo, VarTable};

/// Default per-query budget.
pub const DEFAULT_BUDGET: Duration = Duration::from_secs(1);

/// A conjunction of boolean constraints over the input variables of `vars`.
#[derive(Debug, Clone)]
pub struct Formula {
    pub constraints: Vec<Term>,
    pub vars: Arc<VarTable>,
}

impl Formula {
    pub fn new(vars: Arc<VarTable>) -> Self {
        Formula { constraints: Vec::new(), vars }
    }

    pub fn with(&self, c: Term) -> Formula {
        let mut f = self.clone();
        f.constraints.push(c);
        f
    }

    pub fn holds(&self, model: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.holds(model, self.vars.width))
    }

    pub fn display(&self) -> String {
        if self.constraints.is_empty() {
            return "true".into();
        }
        self.constraints.iter().map(|c| c.display(&self.vars).to_string()).collect::<Vec<_>>().join(" && ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// One value per variable of the formula's table, inside its domain.
    Sat(Model),
    UnsatWithinDomain,
    Timeout,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("variable {0} has no declared domain")]
    DomainMissing(String),
}

/// Decides `f` within the declared domains. The first model in
/// lexicographic order (declaration order, ascending values) over the
/// constrained variables is returned; unconstrained variables take their
/// domain's lower bound.
pub fn solve(f: &Formula, budget: Duration) -> Result<SolveResult, SolverError> {
    search::solve(f, budget)
}
