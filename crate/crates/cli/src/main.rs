use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use labelc_core::bench::{bench_compare, render, BenchOptions, Format};
use labelc_core::coverage::{infeasible_labels_bruteforce, lc_score};
use labelc_core::frontend::{normalize, parse, parse_expr, program_to_string};
use labelc_core::labeling::{annotate, AnnotateOptions, AnnotatedProgram, Criterion, LabelWarning, MutationOperator};
use labelc_core::symexec::{explore, explore_idl, ExploreConfig, Idl, TestSuite};
use labelc_core::{corpus, direct_instrument, tight_instrument, Program};

/// A problem with the command line or its inputs (exit code 1).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

#[derive(Parser)]
#[command(name = "labelc", version, about = "Label coverage: annotate, instrument, generate tests, score")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label a program: writes <name>.labels.json.
    Annotate {
        file: PathBuf,
        #[command(flatten)]
        labels: LabelArgs,
    },
    /// Instrument a program: writes <name>.<mode>.lbl.
    Instrument {
        file: PathBuf,
        #[command(flatten)]
        labels: LabelArgs,
        #[arg(long, value_enum, default_value = "tight")]
        mode: ModeArg,
        /// Add coverage hooks to direct instrumentation.
        #[arg(long)]
        hooks: bool,
    },
    /// Generate tests: writes <name>.suite.json and <name>.coverage.json.
    Gen {
        file: PathBuf,
        #[command(flatten)]
        labels: LabelArgs,
        #[arg(long, value_enum, default_value = "tight")]
        mode: ModeArg,
        /// Iterative label deletion: 0 off, 1 symbolic, 2 with concrete replay.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
        idl: u8,
        #[command(flatten)]
        explore: ExploreArgs,
    },
    /// Score a suite: writes <name>.coverage.json.
    Score {
        file: PathBuf,
        #[command(flatten)]
        labels: LabelArgs,
        /// A suite.json file.
        #[arg(long)]
        suite: PathBuf,
    },
    /// Compare DSE(P), DSE(P'), DSE(P*) and DSE*(P*) over the corpus.
    Bench {
        /// Corpus programs to run; all by default.
        #[arg(long = "program")]
        programs: Vec<String>,
        /// Restrict rows to this criterion.
        #[arg(long)]
        criterion: Option<Criterion>,
        #[arg(long, default_value = "md")]
        format: String,
        #[command(flatten)]
        explore: ExploreArgs,
        /// Path cap per exploration.
        #[arg(long, default_value_t = 20_000)]
        max_paths: u64,
    },
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long, default_value = "cc")]
    criterion: Criterion,
    /// Mutation operators for wm, comma separated.
    #[arg(long, value_delimiter = ',')]
    wm_ops: Vec<MutationOperator>,
    /// Partition predicates for idp, one per line.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Use labels from a labels.json file instead of a criterion.
    #[arg(long, conflicts_with_all = ["wm_ops", "partition"])]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct ExploreArgs {
    /// Bound on original decisions per path; the corpus default when omitted.
    #[arg(short = 'k')]
    k: Option<usize>,
    /// Per-query solver budget in seconds.
    #[arg(long, default_value_t = 60.0)]
    solver_timeout: f64,
    /// Exploration budget in seconds.
    #[arg(long, default_value_t = 300.0)]
    budget: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Direct,
    Tight,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::Direct => "direct",
            ModeArg::Tight => "tight",
        }
    }
}

fn seconds(s: f64, flag: &str) -> Result<Duration> {
    if !s.is_finite() || s <= 0.0 {
        return usage(format!("--{flag} must be a positive number of seconds"));
    }
    Ok(Duration::from_secs_f64(s))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())).into())
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "program".into())
}

fn load_program(path: &Path) -> Result<Program> {
    let src = read(path)?;
    let p = parse(&src).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    normalize(&p).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

fn load_labels(p: &Program, args: &LabelArgs) -> Result<AnnotatedProgram> {
    if let Some(path) = &args.labels {
        let json = read(path)?;
        return AnnotatedProgram::with_labels_json(p.clone(), &json).map_err(|e| Usage(format!("{}: {e}", path.display())).into());
    }
    let mut opts = AnnotateOptions { wm_ops: args.wm_ops.clone(), partition: Vec::new() };
    if args.criterion == Criterion::Idp {
        let Some(path) = &args.partition else { return usage("--criterion idp needs --partition <file>") };
        for line in read(path)?.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            opts.partition.push(parse_expr(line, false).map_err(|e| Usage(format!("{}: {e}", path.display())))?);
        }
    }
    let (ap, warnings) = annotate(p, args.criterion, &opts).map_err(|e| Usage(e.to_string()))?;
    for w in warnings {
        match w {
            LabelWarning::NonDisjointPartition { first, second, witness } => {
                eprintln!("warning: partition predicates {first} and {second} overlap, e.g. on {}", serde_json::to_string(&witness)?)
            }
            LabelWarning::PartitionUnchecked => eprintln!("warning: input domain too large to check the partition"),
        }
    }
    Ok(ap)
}

fn write(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn coverage_json(ap: &AnnotatedProgram, suite: &TestSuite) -> serde_json::Value {
    let report = lc_score(ap, suite);
    match infeasible_labels_bruteforce(ap) {
        Ok(infeasible) => report.with_infeasible(&infeasible).to_json(),
        Err(_) => report.to_json(),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Ok(seed) = std::env::var("LABELC_SEED") {
        // Reserved: exploration is deterministic and ignores it.
        if seed.parse::<u64>().is_err() {
            return usage(format!("LABELC_SEED must be an unsigned integer, got `{seed}`"));
        }
    }
    match cli.command {
        Command::Annotate { file, labels } => {
            let p = load_program(&file)?;
            let ap = load_labels(&p, &labels)?;
            let path = write(&cli.out, &format!("{}.labels.json", stem(&file)), &pretty(&ap.labels_json()))?;
            println!("{} labels -> {}", ap.labels.len(), path.display());
        }
        Command::Instrument { file, labels, mode, hooks } => {
            let p = load_program(&file)?;
            let ap = load_labels(&p, &labels)?;
            let ip = match mode {
                ModeArg::Direct => direct_instrument(&ap, hooks),
                ModeArg::Tight if hooks => return usage("--hooks only applies to --mode direct"),
                ModeArg::Tight => tight_instrument(&ap),
            };
            let path = write(&cli.out, &format!("{}.{}.lbl", stem(&file), mode.name()), &program_to_string(&ip.program))?;
            println!("{} labels instrumented -> {}", ap.labels.len(), path.display());
        }
        Command::Gen { file, labels, mode, idl, explore: ex } => {
            let p = load_program(&file)?;
            let ap = load_labels(&p, &labels)?;
            let idl = Idl::from_level(idl).expect("clap keeps idl in range");
            if idl != Idl::Off && mode == ModeArg::Direct {
                return usage("--idl needs --mode tight");
            }
            let k = ex.k.unwrap_or(ExploreConfig::default().k);
            let cfg = ExploreConfig {
                k,
                solver_budget: seconds(ex.solver_timeout, "solver-timeout")?,
                budget: seconds(ex.budget, "budget")?,
                ..ExploreConfig::default()
            };
            let suite = match (mode, idl) {
                (ModeArg::Direct, _) => explore(&direct_instrument(&ap, false).program, cfg),
                (ModeArg::Tight, Idl::Off) => explore(&tight_instrument(&ap).program, cfg),
                (ModeArg::Tight, idl) => explore_idl(&ap, cfg, idl).0,
            };
            let name = stem(&file);
            let doc = suite.to_json(&p.name, labels.criterion.name(), mode.name(), idl.level(), k);
            let suite_path = write(&cli.out, &format!("{name}.suite.json"), &pretty(&doc))?;
            let cov = coverage_json(&ap, &suite);
            let cov_path = write(&cli.out, &format!("{name}.coverage.json"), &pretty(&cov))?;
            println!(
                "{} tests, {} paths{} -> {}, {}",
                suite.entries.len(),
                suite.stats.paths,
                if suite.truncated { " (truncated)" } else { "" },
                suite_path.display(),
                cov_path.display()
            );
        }
        Command::Score { file, labels, suite } => {
            let p = load_program(&file)?;
            let ap = load_labels(&p, &labels)?;
            let doc: serde_json::Value = serde_json::from_str(&read(&suite)?).map_err(|e| Usage(format!("{}: {e}", suite.display())))?;
            let ts = TestSuite::from_json(&doc).map_err(|e| Usage(format!("{}: {e}", suite.display())))?;
            let cov = coverage_json(&ap, &ts);
            let path = write(&cli.out, &format!("{}.coverage.json", stem(&file)), &pretty(&cov))?;
            println!("{} -> {}", cov["score_raw"], path.display());
        }
        Command::Bench { programs, criterion, format, explore: ex, max_paths } => {
            let format: Format = format.parse().map_err(Usage)?;
            let all = corpus::all();
            for name in &programs {
                if !all.iter().any(|c| &c.name == name) {
                    return usage(format!("no corpus program named `{name}`"));
                }
            }
            let opts = BenchOptions {
                k: ex.k,
                solver_budget: seconds(ex.solver_timeout, "solver-timeout")?,
                budget: seconds(ex.budget, "budget")?,
                max_paths: Some(max_paths),
            };
            let mut rows = Vec::new();
            for c in all.iter().filter(|c| programs.is_empty() || programs.contains(&c.name)) {
                for &crit in c.bench.iter().filter(|&&b| criterion.is_none_or(|x| x == b)) {
                    rows.push(bench_compare(c, crit, &opts)?);
                }
            }
            print!("{}", render(&rows, format));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
