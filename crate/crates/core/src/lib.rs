//! Label coverage toolchain: labelling functions that emulate classic
//! coverage criteria and weak mutations, direct and tight instrumentation,
//! bounded symbolic execution with iterative label deletion, and coverage
//! scoring.

pub mod bench;
pub mod corpus;
pub mod coverage;
pub mod domain;
pub mod frontend;
pub mod instrument;
pub mod labeling;
pub mod semantics;
pub mod solver;
pub mod symexec;

pub use bench::{bench_compare, bench_corpus, BenchOptions, BenchRow, Config, Format};
pub use corpus::CorpusProgram;
pub use coverage::{covers, infeasible_labels_bruteforce, lc_score, wm_kill_oracle, CoverageError, CoverageReport, LabelStatus};
pub use frontend::{normalize, parse, FrontendError, LabelId, LocationId, Program};
pub use instrument::{direct_instrument, strip, tight_instrument, InstrumentedProgram, Mode};
pub use labeling::{annotate, AnnotateOptions, AnnotatedProgram, Criterion, Label, LabelError, Mutant, MutationOperator};
pub use semantics::{IntWidth, Interval, TestInput, Value};
pub use solver::{solve, Formula, SolveResult, SolverError};
pub use symexec::{concrete_run, count_paths, explore, explore_idl, path_predicate, CoverageStore, ExploreConfig, Idl, Outcome, RunConfig, TestSuite, Trace};
