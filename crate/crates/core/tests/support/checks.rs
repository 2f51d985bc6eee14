//! Property checks shared by the acceptance runner and the test targets.

use sqlmigrate::ast::{structural_equal, SqlSegment};
use sqlmigrate::baseline::Converter;
use sqlmigrate::corpus::{run_eval, Corpus};
use sqlmigrate::dialect::DialectProfile;
use sqlmigrate::engine::{apply, EngineError, PatternNode, TransformRule};
use sqlmigrate::induction::{induce, Demonstration};
use sqlmigrate::parser::parse;
use sqlmigrate::printer::print;
use sqlmigrate::verify::{verify_with, VerifyConfig};

use super::lgg_oracle::{changed_size, lgg_oracle};

pub const FUZZ_CASES: u64 = 1000;
pub const ORACLE_MAX_NODES: usize = 25;

/// Rules learned from every corpus case that induces one.
pub fn learned_rules(corpus: &Corpus) -> Vec<TransformRule> {
    run_eval(corpus, Converter::shared(), VerifyConfig::default())
        .cases
        .into_iter()
        .filter_map(|c| c.rule)
        .collect()
}

pub fn fuzz_texts() -> Vec<(String, String)> {
    (0..FUZZ_CASES)
        .map(|s| (format!("fuzz-{s}"), super::gen::script(s)))
        .collect()
}

/// Names of texts whose parse, print, parse cycle changes the tree.
pub fn roundtrip_failures(texts: &[(String, String)], dialect: &DialectProfile) -> Vec<String> {
    texts
        .iter()
        .filter(|(_, text)| {
            let Ok(a) = parse(text, dialect) else {
                return true;
            };
            let Ok(printed) = print(&a, dialect) else {
                return true;
            };
            !parse(&printed, dialect).is_ok_and(|b| structural_equal(&a, &b))
        })
        .map(|(name, _)| name.clone())
        .collect()
}

pub fn segments(name: &str, text: &str) -> Vec<SqlSegment> {
    let src = DialectProfile::src();
    let script = parse(text, src).unwrap_or_else(|e| panic!("{name} does not parse: {e}"));
    SqlSegment::split_script(name, &src.name, text, &script)
}

#[derive(Debug, Default)]
pub struct ConversionStats {
    pub segments: usize,
    pub converted: usize,
    pub non_terminating: Vec<String>,
    pub over_bound: Vec<String>,
    pub ungrammatical: Vec<String>,
    pub inequivalent: Vec<String>,
}

/// Converts every segment of `texts` with `learned` and checks termination,
/// re-parsing under TGT, and non-NULL equivalence of each emitted segment.
pub fn check_conversions(texts: &[(String, String)], learned: &[TransformRule]) -> ConversionStats {
    let conv = Converter::shared();
    let mut stats = ConversionStats::default();
    for (name, text) in texts {
        for seg in segments(name, text) {
            stats.segments += 1;
            let bound = 10 * seg.ast.node_count();
            match conv.rewrite(&seg.ast, learned) {
                Err(EngineError::NonTermination { .. }) => {
                    stats.non_terminating.push(seg.segment_id.clone())
                }
                Ok((_, trace)) if trace.len() > bound => {
                    stats.over_bound.push(seg.segment_id.clone())
                }
                _ => {}
            }
            let outcome = conv.convert(&seg, learned).outcome;
            let Some(out) = outcome.converted_text() else {
                continue;
            };
            stats.converted += 1;
            if parse(out, DialectProfile::tgt()).is_err() {
                stats.ungrammatical.push(seg.segment_id.clone());
            }
            let report = verify_with(&seg, out, None, &conv.dialects, VerifyConfig::default());
            if !report.equivalent_non_null {
                stats.inequivalent.push(seg.segment_id.clone());
            }
        }
    }
    stats
}

/// Applying a rule that matches nothing returns the input unchanged.
pub fn zero_match_identity_failures(texts: &[(String, String)]) -> Vec<String> {
    let absent = TransformRule {
        rule_id: "absent".into(),
        trigger: None,
        pattern: PatternNode::node(
            sqlmigrate::ast::NodeKind::FunctionCall,
            Some("NO_SUCH_FN"),
            vec![PatternNode::hole("x")],
        ),
        guard: vec![],
        template: PatternNode::hole("x"),
        provenance: sqlmigrate::engine::Provenance {
            origin: sqlmigrate::engine::Origin::Learned,
            demos: vec![],
        },
        priority: 0,
    };
    texts
        .iter()
        .filter(|(_, text)| {
            let tree = parse(text, DialectProfile::src()).expect("fixture parses");
            !matches!(apply(&absent, &tree), Ok((out, 0)) if out == tree)
        })
        .map(|(n, _)| n.clone())
        .collect()
}

#[derive(Debug, Default)]
pub struct OracleStats {
    pub compared: usize,
    pub skipped_large: usize,
    pub disagreements: Vec<String>,
}

/// Compares `induce` with the exhaustive oracle on every single demo and on
/// each case's full demo set.
pub fn oracle_agreement(corpus: &Corpus) -> OracleStats {
    let conv = Converter::shared();
    let mut stats = OracleStats::default();
    for case in &corpus.cases {
        let demos: Vec<Demonstration> = case
            .demos
            .iter()
            .map(|r| Demonstration::from_record(conv, r).expect("corpus demo is valid"))
            .collect();
        let mut sets: Vec<Vec<Demonstration>> = demos.iter().map(|d| vec![d.clone()]).collect();
        if demos.len() > 1 {
            sets.push(demos.clone());
        }
        for set in sets {
            let label = format!(
                "{}[{}]",
                case.code,
                set.iter()
                    .map(|d| d.demo_id.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            if changed_size(conv, &set).is_some_and(|n| n > ORACLE_MAX_NODES) {
                stats.skipped_large += 1;
                continue;
            }
            stats.compared += 1;
            if !same_rule(
                &induce(&set).map_err(|e| e.to_string()),
                &lgg_oracle(conv, &set),
            ) {
                stats.disagreements.push(label);
            }
        }
    }
    stats
}

pub fn same_rule(a: &Result<TransformRule, String>, b: &Result<TransformRule, String>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.pattern == y.pattern && x.guard == y.guard && x.template == y.template,
        (Err(_), Err(_)) => true,
        _ => false,
    }
}
