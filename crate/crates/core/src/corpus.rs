//! Built-in benchmark programs and their manifest.

use serde::Deserialize;

use crate::frontend::ast::LabelId;
use crate::frontend::{normalize, parse, Program};
use crate::labeling::{annotate, AnnotateOptions, AnnotatedProgram, Criterion, Label, LabelError};

const MANIFEST: &str = include_str!("../corpus/manifest.toml");

const SOURCES: &[(&str, &str)] = &[
    ("trityp.lbl", include_str!("../corpus/trityp.lbl")),
    ("fourballs.lbl", include_str!("../corpus/fourballs.lbl")),
    ("utf8_3.lbl", include_str!("../corpus/utf8_3.lbl")),
    ("utf8_5.lbl", include_str!("../corpus/utf8_5.lbl")),
    ("utf8_7.lbl", include_str!("../corpus/utf8_7.lbl")),
    ("tcas.lbl", include_str!("../corpus/tcas.lbl")),
    ("tcas_prime.lbl", include_str!("../corpus/tcas_prime.lbl")),
    ("replace.lbl", include_str!("../corpus/replace.lbl")),
    ("straight10.lbl", include_str!("../corpus/straight10.lbl")),
    ("leapyear.lbl", include_str!("../corpus/leapyear.lbl")),
    ("clamp.lbl", include_str!("../corpus/clamp.lbl")),
    ("safediv.lbl", include_str!("../corpus/safediv.lbl")),
    ("sumloop.lbl", include_str!("../corpus/sumloop.lbl")),
    ("maxindex.lbl", include_str!("../corpus/maxindex.lbl")),
    ("fig2.lbl", include_str!("../corpus/fig2.lbl")),
];

#[derive(Debug, Clone, Deserialize)]
struct Manifest {
    program: Vec<Entry>,
}

#[derive(Debug, Clone, Deserialize)]
struct Entry {
    name: String,
    file: String,
    k: usize,
    #[serde(default)]
    bench: Vec<Criterion>,
    #[serde(default)]
    scope: Option<(u32, u32)>,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CorpusProgram {
    pub name: String,
    pub source: &'static str,
    /// Normalized program.
    pub program: Program,
    /// Default exploration bound.
    pub k: usize,
    /// Criteria compared by the benchmark, in row order.
    pub bench: Vec<Criterion>,
    /// Inclusive source-line range labels are restricted to.
    pub scope: Option<(u32, u32)>,
    pub note: Option<String>,
}

impl CorpusProgram {
    /// Labels the program, keeping only labels in scope; ids are
    /// renumbered densely.
    pub fn annotate(&self, criterion: Criterion) -> Result<AnnotatedProgram, LabelError> {
        let (ap, _) = annotate(&self.program, criterion, &AnnotateOptions::default())?;
        let Some((lo, hi)) = self.scope else { return Ok(ap) };
        let lines = |l: &Label| ap.program.stmt(l.loc).map(|s| s.line);
        let labels = ap
            .labels
            .iter()
            .filter(|l| lines(l).is_some_and(|line| (lo..=hi).contains(&line)))
            .enumerate()
            .map(|(i, l)| Label { id: LabelId(i as u32), ..l.clone() })
            .collect();
        Ok(AnnotatedProgram { program: ap.program.clone(), labels })
    }

    /// Input count, array cells included.
    pub fn input_count(&self) -> usize {
        crate::solver::VarTable::from_program(&self.program).len()
    }
}

/// Every corpus program, in manifest order.
pub fn all() -> Vec<CorpusProgram> {
    let manifest: Manifest = toml::from_str(MANIFEST).expect("corpus manifest parses");
    manifest
        .program
        .into_iter()
        .map(|e| {
            let source = SOURCES.iter().find(|(f, _)| *f == e.file).map(|(_, s)| *s).expect("corpus file is bundled");
            let program = parse(source).and_then(|p| normalize(&p)).unwrap_or_else(|err| panic!("{}: {err}", e.file));
            CorpusProgram { name: e.name, source, program, k: e.k, bench: e.bench, scope: e.scope, note: e.note }
        })
        .collect()
}

pub fn get(name: &str) -> Option<CorpusProgram> {
    all().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Value;
    use crate::symexec::{concrete_run, Outcome, RunConfig};

    #[test]
    fn all_programs_load_and_label() {
        let corpus = all();
        assert_eq!(corpus.len(), SOURCES.len());
        for c in &corpus {
            for crit in [Criterion::Cc, Criterion::Mcc, Criterion::Wm] {
                let ap = c.annotate(crit).unwrap();
                ap.validate().unwrap();
            }
        }
    }

    #[test]
    fn tcas_scope_keeps_final_decision() {
        let tcas = get("tcas").unwrap();
        let ap = tcas.annotate(Criterion::Cc).unwrap();
        assert_eq!(ap.labels.len(), 4);
        assert!(ap.labels.iter().enumerate().all(|(i, l)| l.id == LabelId(i as u32)));
    }

    #[test]
    fn trityp_classifies() {
        let t = get("trityp").unwrap();
        let run = |i, j, k| {
            let input = [("i", i), ("j", j), ("k", k)].into_iter().map(|(n, v)| (n.to_string(), Value::Scalar(v))).collect();
            concrete_run(&t.program, &input, RunConfig::default()).outcome
        };
        assert_eq!(run(2, 2, 2), Outcome::Return { value: Some(3) });
        assert_eq!(run(3, 4, 5), Outcome::Return { value: Some(1) });
        assert_eq!(run(2, 2, 3), Outcome::Return { value: Some(2) });
        assert_eq!(run(1, 2, 3), Outcome::Return { value: Some(4) });
        assert_eq!(run(0, 2, 3), Outcome::Return { value: Some(4) });
    }
}
