//! The four-way exploration comparison: DSE(P), DSE(P'), DSE(P*) and
//! DSE*(P*) at equal bound and budgets.

use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusProgram;
use crate::coverage::lc_score_inputs;
use crate::instrument::{direct_instrument, tight_instrument};
use crate::labeling::{AnnotatedProgram, Criterion, LabelError};
use crate::symexec::{explore, explore_idl, ExploreConfig, Idl, TestSuite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Config {
    /// Plain program.
    Plain,
    /// Direct instrumentation.
    Direct,
    /// Tight instrumentation.
    Tight,
    /// Tight instrumentation with iterative label deletion (idl2).
    TightIdl,
}

impl Config {
    pub const ALL: [Config; 4] = [Config::Plain, Config::Direct, Config::Tight, Config::TightIdl];

    pub fn header(self) -> &'static str {
        match self {
            Config::Plain => "DSE(P)",
            Config::Direct => "DSE(P')",
            Config::Tight => "DSE(P*)",
            Config::TightIdl => "DSE*(P*)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config: Config,
    pub paths: u64,
    pub time_ms: u64,
    /// Labels covered by the suite; not measured on the plain program.
    pub covered: Option<usize>,
    pub truncated: bool,
    /// Most label constraints on one explored path.
    pub max_label_constraints: u64,
    /// Longest explored path, in statement visits.
    pub max_path_len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub program: String,
    pub criterion: Criterion,
    pub labels: usize,
    pub k: usize,
    /// In [`Config::ALL`] order.
    pub results: Vec<ConfigResult>,
}

impl BenchRow {
    pub fn result(&self, c: Config) -> &ConfigResult {
        self.results.iter().find(|r| r.config == c).expect("every configuration is run")
    }

    pub fn any_truncated(&self) -> bool {
        self.results.iter().any(|r| r.truncated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("{program}/{criterion}: {message}")]
    Invariant { program: String, criterion: Criterion, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    /// Overrides the manifest bound.
    pub k: Option<usize>,
    pub solver_budget: Duration,
    pub budget: Duration,
    pub max_paths: Option<u64>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        let d = ExploreConfig::default();
        BenchOptions { k: None, solver_budget: Duration::from_secs(60), budget: d.budget, max_paths: Some(20_000) }
    }
}

fn measure(config: Config, ap: &AnnotatedProgram, cfg: ExploreConfig) -> ConfigResult {
    let suite: TestSuite = match config {
        Config::Plain => explore(&ap.program, cfg),
        Config::Direct => explore(&direct_instrument(ap, false).program, cfg),
        Config::Tight => explore(&tight_instrument(ap).program, cfg),
        Config::TightIdl => explore_idl(ap, cfg, Idl::Idl2).0,
    };
    let covered = (config != Config::Plain).then(|| lc_score_inputs(ap, &suite.inputs(), Some(cfg.k)).covered_count());
    ConfigResult {
        config,
        paths: suite.stats.paths,
        time_ms: suite.stats.time_ms,
        covered,
        truncated: suite.truncated,
        max_label_constraints: suite.stats.max_label_constraints,
        max_path_len: suite.stats.max_path_len,
    }
}

/// Runs the four configurations on `ap` and checks path ordering and
/// equal coverage across instrumented configurations. Checks involving a
/// truncated run are skipped.
pub fn bench_annotated(name: &str, criterion: Criterion, ap: &AnnotatedProgram, k: usize, opts: &BenchOptions) -> Result<BenchRow, BenchError> {
    let cfg = ExploreConfig { k, solver_budget: opts.solver_budget, budget: opts.budget, max_paths: opts.max_paths, ..ExploreConfig::default() };
    let results: Vec<ConfigResult> = Config::ALL.iter().map(|&c| measure(c, ap, cfg)).collect();
    let row = BenchRow { program: name.to_string(), criterion, labels: ap.labels.len(), k, results };
    let fail = |message: String| BenchError::Invariant { program: name.to_string(), criterion, message };
    let chain = [Config::TightIdl, Config::Tight, Config::Direct];
    for pair in chain.windows(2) {
        let (a, b) = (row.result(pair[0]), row.result(pair[1]));
        if !a.truncated && !b.truncated && a.paths > b.paths {
            return Err(fail(format!("{} explored {} paths, more than {} with {}", pair[0].header(), a.paths, pair[1].header(), b.paths)));
        }
    }
    let complete: Vec<&ConfigResult> = chain.iter().map(|&c| row.result(c)).filter(|r| !r.truncated).collect();
    if complete.windows(2).any(|w| w[0].covered != w[1].covered) {
        let covers: Vec<String> = complete.iter().map(|r| format!("{}={:?}", r.config.header(), r.covered)).collect();
        return Err(fail(format!("coverage differs: {}", covers.join(", "))));
    }
    Ok(row)
}

/// [`bench_annotated`] on a corpus program at its manifest bound.
pub fn bench_compare(c: &CorpusProgram, criterion: Criterion, opts: &BenchOptions) -> Result<BenchRow, BenchError> {
    let ap = c.annotate(criterion)?;
    bench_annotated(&c.name, criterion, &ap, opts.k.unwrap_or(c.k), opts)
}

/// Every manifest row, in corpus order.
pub fn bench_corpus(corpus: &[CorpusProgram], opts: &BenchOptions) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for c in corpus {
        for &criterion in &c.bench {
            rows.push(bench_compare(c, criterion, opts)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Md,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "md" => Ok(Format::Md),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected md, csv or json)")),
        }
    }
}

fn paths_cell(r: &ConfigResult) -> String {
    if r.truncated {
        format!(">={}", r.paths)
    } else {
        r.paths.to_string()
    }
}

fn cover_cell(r: &ConfigResult, total: usize) -> String {
    match r.covered {
        Some(c) => format!("{c}/{total}"),
        None => "-".into(),
    }
}

fn columns() -> Vec<String> {
    let mut cols = vec!["program".to_string(), "criterion".into(), "|L|".into()];
    for c in Config::ALL {
        for what in ["paths", "time_ms", "cover"] {
            cols.push(format!("{} {what}", c.header()));
        }
    }
    cols
}

fn cells(row: &BenchRow) -> Vec<String> {
    let mut out = vec![row.program.clone(), row.criterion.to_string(), row.labels.to_string()];
    for r in &row.results {
        out.push(paths_cell(r));
        out.push(r.time_ms.to_string());
        out.push(cover_cell(r, row.labels));
    }
    out
}

/// Renders rows; paths of truncated runs are marked `>=`.
pub fn render(rows: &[BenchRow], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Md => {
            let cols = columns();
            writeln!(out, "| {} |", cols.join(" | ")).unwrap();
            writeln!(out, "|{}", "---|".repeat(cols.len())).unwrap();
            for row in rows {
                writeln!(out, "| {} |", cells(row).join(" | ")).unwrap();
            }
        }
        Format::Csv => {
            writeln!(out, "{}", columns().join(",")).unwrap();
            for row in rows {
                writeln!(out, "{}", cells(row).join(",")).unwrap();
            }
        }
        Format::Json => {
            out = serde_json::to_string_pretty(rows).expect("rows serialize");
            out.push('\n');
        }
    }
    out
}

/// `render` with time columns blanked, for comparing runs.
pub fn without_times(rows: &[BenchRow]) -> Vec<BenchRow> {
    rows.iter()
        .cloned()
        .map(|mut r| {
            r.results.iter_mut().for_each(|c| c.time_ms = 0);
            r
        })
        .collect()
}
