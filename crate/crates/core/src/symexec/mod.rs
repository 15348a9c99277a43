//! Concrete and symbolic execution, bounded exploration and iterative
//! label deletion.

pub mod concrete;
pub mod explore;
pub mod paths;
pub mod pc;
pub mod suite;
pub mod symbolic;

pub use concrete::{concrete_run, runs_started, Machine, NondetPolicy, Outcome, RunConfig, Trace, DEFAULT_FUEL};
pub use explore::{explore, explore_idl, ExploreConfig, Idl};
pub use paths::{count_paths, path_predicate, Decision, PathPrefix, PrefixError};
pub use suite::{CoverageStore, ExploreStats, SuiteEntry, TestSuite};
