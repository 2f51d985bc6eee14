//! Evaluation corpus: per gap class, a few demonstrations and held-out
//! segments with expert targets, plus a set of fully convertible fixtures.
//!
//! ```text
//! corpus/E0NN/demo-*.json
//! corpus/E0NN/holdout-*.sql
//! corpus/E0NN/expected-*.sql
//! corpus/convertible/*.sql
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ast::SqlSegment;
use crate::baseline::Converter;
use crate::engine::TransformRule;
use crate::error::{Error, Result};
use crate::induction::{induce_with, DemoRecord, Demonstration};
use crate::parser::parse;
use crate::verify::{verify_with, VerifyConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holdout {
    pub name: String,
    pub source: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCase {
    pub code: String,
    pub demos: Vec<DemoRecord>,
    pub holdouts: Vec<Holdout>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub cases: Vec<CorpusCase>,
    pub convertible: Vec<Fixture>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    out.sort();
    Ok(out)
}

fn file_name(p: &Path) -> &str {
    p.file_name().and_then(|n| n.to_str()).unwrap_or("")
}

impl Corpus {
    pub fn load(root: &Path) -> Result<Corpus> {
        let mut corpus = Corpus::default();
        for dir in sorted_entries(root)? {
            let name = file_name(&dir).to_string();
            if !dir.is_dir() {
                continue;
            }
            if name == "convertible" {
                for f in sorted_entries(&dir)? {
                    if f.extension().is_some_and(|e| e == "sql") {
                        corpus.convertible.push(Fixture {
                            name: file_name(&f).to_string(),
                            text: read(&f)?,
                        });
                    }
                }
                continue;
            }
            if !(name.len() == 4 && name.starts_with('E')) {
                continue;
            }
            let mut case = CorpusCase {
                code: name.clone(),
                demos: Vec::new(),
                holdouts: Vec::new(),
            };
            for f in sorted_entries(&dir)? {
                let fname = file_name(&f);
                if fname.starts_with("demo-") && fname.ends_with(".json") {
                    let record: DemoRecord = serde_json::from_str(&read(&f)?)?;
                    if record.error_code != name {
                        return Err(Error::Invalid(format!(
                            "{}: demo is for {}",
                            f.display(),
                            record.error_code
                        )));
                    }
                    case.demos.push(record);
                } else if let Some(stem) = fname
                    .strip_prefix("holdout-")
                    .and_then(|s| s.strip_suffix(".sql"))
                {
                    let expected = dir.join(format!("expected-{stem}.sql"));
                    case.holdouts.push(Holdout {
                        name: stem.to_string(),
                        source: read(&f)?,
                        expected: read(&expected)?,
                    });
                }
            }
            corpus.cases.push(case);
        }
        Ok(corpus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldoutResult {
    pub name: String,
    pub exact: bool,
    pub verified: bool,
    pub output: Option<String>,
    pub residual_codes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub code: String,
    pub resolved: bool,
    pub demos_used: usize,
    pub rule: Option<TransformRule>,
    pub induction_error: Option<String>,
    pub holdouts: Vec<HoldoutResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResult {
    pub cases: Vec<CaseResult>,
    pub resolved_count: usize,
    pub total: usize,
    pub regression_count: usize,
    pub regressions: Vec<String>,
    /// Learned-rule rewrites on convertible fixtures.
    pub overreach_count: usize,
}

impl EvalResult {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6} {:<9} {:>5} {:>9}  note",
            "code", "resolved", "demos", "holdouts"
        );
        for c in &self.cases {
            let exact = c.holdouts.iter().filter(|h| h.exact && h.verified).count();
            let note = c.induction_error.clone().unwrap_or_default();
            let _ = writeln!(
                out,
                "{:<6} {:<9} {:>5} {:>9}  {}",
                c.code,
                if c.resolved { "yes" } else { "no" },
                c.demos_used,
                format!("{exact}/{}", c.holdouts.len()),
                note
            );
        }
        let _ = writeln!(out, "resolved {}/{}", self.resolved_count, self.total);
        let _ = writeln!(out, "regressions {}", self.regression_count);
        out
    }
}

fn eval_case(converter: &Converter, case: &CorpusCase, config: VerifyConfig) -> CaseResult {
    let mut result = CaseResult {
        code: case.code.clone(),
        resolved: false,
        demos_used: case.demos.len(),
        rule: None,
        induction_error: None,
        holdouts: Vec::new(),
    };
    let demos: std::result::Result<Vec<_>, _> = case
        .demos
        .iter()
        .map(|r| Demonstration::from_record(converter, r))
        .collect();
    let rule = demos.and_then(|d| induce_with(converter, &d, crate::engine::LEARNED_PRIORITY));
    let rule = match rule {
        Ok(rule) => rule,
        Err(e) => {
            result.induction_error = Some(e.to_string());
            return result;
        }
    };
    for h in &case.holdouts {
        let segment = match SqlSegment::parse(
            &format!("{}/holdout-{}", case.code, h.name),
            &h.source,
            &converter.dialects.src,
        ) {
            Ok(s) => s,
            Err(e) => {
                result.holdouts.push(HoldoutResult {
                    name: h.name.clone(),
                    exact: false,
                    verified: false,
                    output: None,
                    residual_codes: vec![format!("E000: {e}")],
                });
                continue;
            }
        };
        let outcome = converter
            .convert(&segment, std::slice::from_ref(&rule))
            .outcome;
        let output = outcome.converted_text().map(str::to_string);
        let exact = output.as_deref() == Some(h.expected.trim_end());
        let verified = output.as_deref().is_some_and(|o| {
            verify_with(&segment, o, Some(&case.code), &converter.dialects, config).accepted
        });
        result.holdouts.push(HoldoutResult {
            name: h.name.clone(),
            exact,
            verified,
            output,
            residual_codes: outcome.errors.iter().map(|e| e.code.clone()).collect(),
        });
    }
    result.resolved =
        !result.holdouts.is_empty() && result.holdouts.iter().all(|h| h.exact && h.verified);
    result.rule = Some(rule);
    result
}

/// Output of every segment of a convertible fixture under `rules`.
fn fixture_outputs(
    converter: &Converter,
    f: &Fixture,
    rules: &[TransformRule],
) -> (Vec<Option<String>>, usize) {
    let Ok(script) = parse(&f.text, &converter.dialects.src) else {
        return (vec![None], 0);
    };
    let mut learned_hits = 0;
    let outputs = SqlSegment::split_script(&f.name, &converter.dialects.src.name, &f.text, &script)
        .iter()
        .map(|s| {
            let c = converter.convert(s, rules);
            learned_hits += c
                .trace
                .iter()
                .filter(|t| rules.iter().any(|r| r.rule_id == t.rule_id))
                .count();
            c.outcome.converted_text().map(str::to_string)
        })
        .collect();
    (outputs, learned_hits)
}

/// Induces one rule per case from its demos only, applies it to the case's
/// holdouts, then checks the convertible fixtures against all learned rules.
pub fn run_eval(corpus: &Corpus, converter: &Converter, config: VerifyConfig) -> EvalResult {
    let cases: Vec<CaseResult> = corpus
        .cases
        .iter()
        .map(|c| eval_case(converter, c, config))
        .collect();
    let learned: Vec<TransformRule> = cases.iter().filter_map(|c| c.rule.clone()).collect();
    let mut regressions = Vec::new();
    let mut overreach_count = 0;
    for f in &corpus.convertible {
        let (before, _) = fixture_outputs(converter, f, &[]);
        let (after, hits) = fixture_outputs(converter, f, &learned);
        overreach_count += hits;
        if before != after || before.iter().any(Option::is_none) {
            regressions.push(f.name.clone());
        }
    }
    EvalResult {
        resolved_count: cases.iter().filter(|c| c.resolved).count(),
        total: cases.len(),
        regression_count: regressions.len(),
        regressions,
        overreach_count,
        cases,
    }
}
