use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::ast::{AstNode, NodeKind, Span, SqlSegment};
use crate::baseline::{
    is_intentional_repair, pseudo_error, BaselineOutcome, ConversionError, Converter,
};
use crate::engine::{RuleLibrary, TransformRule};
use crate::error::{Error, Result};
use crate::induction::{induce_with, tree_diff, DemoRecord, Demonstration, Edit};
use crate::parser::parse;
use crate::verify::{verify_with, VerificationReport, VerifyConfig};

/// How a segment reached its current outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum ConvertedBy {
    Baseline,
    Learned { rules: Vec<String> },
    Unconverted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentResult {
    pub outcome: BaselineOutcome,
    pub converted_by: ConvertedBy,
    /// Errors the builtin rules alone leave behind.
    pub baseline_errors: Vec<ConversionError>,
    pub verification: Option<VerificationReport>,
}

impl SegmentResult {
    fn codes(&self) -> BTreeSet<&str> {
        self.outcome
            .errors
            .iter()
            .map(|e| e.code.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoFailure {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionStarted {
        root: PathBuf,
        seed: u64,
        library: RuleLibrary,
    },
    SegmentConverted {
        segment_id: String,
        converted_by: ConvertedBy,
    },
    ErrorRaised {
        segment_id: String,
        code: String,
    },
    DemoSubmitted {
        demo: DemoRecord,
        segment_id: String,
    },
    RuleInduced {
        rule_id: String,
        version: u64,
    },
    RuleApplied {
        rule: TransformRule,
    },
    RuleRejected {
        rule_id: String,
        code: String,
    },
}

impl Event {
    /// Events that are consequences of others and are regenerated on replay.
    fn is_derived(&self) -> bool {
        matches!(
            self,
            Event::SegmentConverted { .. } | Event::ErrorRaised { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingDemo {
    pub segment_id: String,
    pub demo: DemoRecord,
}

/// One segment a previewed rule would rewrite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreviewSite {
    pub segment_id: String,
    pub source: String,
    pub converted: Option<String>,
    pub residual_codes: Vec<String>,
    pub verification: Option<VerificationReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RulePreview {
    pub session_id: String,
    pub version: u64,
    pub code: String,
    pub rule: TransformRule,
    pub summary: String,
    pub demos: Vec<DemoRecord>,
    pub sites: Vec<PreviewSite>,
}

impl RulePreview {
    pub fn all_grammatical(&self) -> bool {
        self.sites
            .iter()
            .all(|s| s.verification.as_ref().is_some_and(|v| v.grammatical))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub root: PathBuf,
    pub seed: u64,
    pub version: u64,
    pub files: Vec<String>,
    pub segments: Vec<SqlSegment>,
    pub outcomes: BTreeMap<String, SegmentResult>,
    pub io_failures: Vec<IoFailure>,
    pub library: RuleLibrary,
    pub pending: BTreeMap<String, Vec<PendingDemo>>,
    pub residuals: BTreeMap<String, Vec<ConversionError>>,
    pub history: Vec<Event>,
}

/// Stable id for the session over `root`.
pub fn session_id_for(root: &Path) -> String {
    let canonical = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    let digest = Sha256::digest(canonical.to_string_lossy().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Splits `segment_id` into its file and ordinal parts.
pub fn segment_file(segment_id: &str) -> &str {
    segment_id.rsplit_once('#').map_or(segment_id, |(f, _)| f)
}

fn sql_files(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(Error::NoInput(root.to_path_buf()));
    }
    let files: Vec<PathBuf> = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "sql"))
        .map(|e| e.into_path())
        .collect();
    if files.is_empty() {
        return Err(Error::NoInput(root.to_path_buf()));
    }
    Ok(files)
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Segments of one file. A file that does not parse becomes one segment with
/// an empty tree.
fn segment_file_text(
    converter: &Converter,
    rel: &str,
    text: &str,
) -> (Vec<SqlSegment>, Option<String>) {
    let src = &converter.dialects.src;
    match parse(text, src) {
        Ok(script) => (
            SqlSegment::split_script(rel, &src.name, text, &script),
            None,
        ),
        Err(e) => {
            let trimmed = text.trim();
            let segment = SqlSegment {
                segment_id: format!("{rel}#0"),
                dialect: src.name.clone(),
                text: trimmed.to_string(),
                ast: AstNode::new(
                    NodeKind::Script,
                    None,
                    Vec::new(),
                    Span::new(0, trimmed.len(), 1),
                ),
            };
            (vec![segment], Some(format!("does not parse: {e}")))
        }
    }
}

/// Size of the edit from the normalized source to `target`.
fn distance(converter: &Converter, source: &AstNode, target: &AstNode) -> usize {
    let source = converter
        .normalize(source)
        .map_or_else(|_| source.clone(), |(t, _)| t);
    tree_diff(&source, target)
        .edits
        .iter()
        .map(|e| match e {
            Edit::Replace { old, new, .. } => old.node_count() + new.node_count(),
            Edit::Insert { subtree, .. } => subtree.node_count(),
            Edit::Delete { .. } => 1,
        })
        .sum()
}

fn repair_code(errors: &[ConversionError]) -> Option<&str> {
    errors
        .iter()
        .map(|e| e.code.as_str())
        .find(|c| is_intentional_repair(c))
        .or_else(|| errors.first().map(|e| e.code.as_str()))
}

/// Baseline first; on failure, learned rules triggered by the raised codes.
/// A learned conversion is kept only if the verifier accepts it.
pub fn convert_segment(
    converter: &Converter,
    segment: &SqlSegment,
    learned: &[TransformRule],
    config: VerifyConfig,
) -> SegmentResult {
    let base = converter.convert(segment, &[]).outcome;
    if base.is_converted() {
        let verification = base
            .converted_text()
            .map(|t| verify_with(segment, t, None, &converter.dialects, config));
        return SegmentResult {
            outcome: base,
            converted_by: ConvertedBy::Baseline,
            baseline_errors: Vec::new(),
            verification,
        };
    }
    let unconverted = |outcome: BaselineOutcome| SegmentResult {
        baseline_errors: base.errors.clone(),
        outcome,
        converted_by: ConvertedBy::Unconverted,
        verification: None,
    };
    let codes: BTreeSet<&str> = base.errors.iter().map(|e| e.code.as_str()).collect();
    let rules: Vec<TransformRule> = learned
        .iter()
        .filter(|r| r.trigger.as_deref().is_some_and(|t| codes.contains(t)))
        .cloned()
        .collect();
    if rules.is_empty() {
        return unconverted(base.clone());
    }
    let conversion = converter.convert(segment, &rules);
    let Some(text) = conversion.outcome.converted_text() else {
        let fewer = conversion.outcome.errors.len() <= base.errors.len();
        return unconverted(if fewer {
            conversion.outcome
        } else {
            base.clone()
        });
    };
    let report = verify_with(
        segment,
        text,
        repair_code(&base.errors),
        &converter.dialects,
        config,
    );
    if !report.accepted {
        let mut result = unconverted(base.clone());
        result.verification = Some(report);
        return result;
    }
    let hit: BTreeSet<String> = conversion
        .trace
        .iter()
        .filter(|s| rules.iter().any(|r| r.rule_id == s.rule_id))
        .map(|s| s.rule_id.clone())
        .collect();
    SegmentResult {
        outcome: conversion.outcome,
        converted_by: ConvertedBy::Learned {
            rules: hit.into_iter().collect(),
        },
        baseline_errors: base.errors.clone(),
        verification: Some(report),
    }
}

fn convert_all(
    converter: &Converter,
    segments: &[&SqlSegment],
    learned: &[TransformRule],
    config: VerifyConfig,
) -> Vec<SegmentResult> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(segments.len().max(1));
    let chunk = segments.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = segments
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|s| convert_segment(converter, s, learned, config))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("conversion worker panicked"))
            .collect()
    })
}

fn outcome_events(segment_id: &str, result: &SegmentResult) -> Vec<Event> {
    if result.outcome.is_converted() {
        return vec![Event::SegmentConverted {
            segment_id: segment_id.to_string(),
            converted_by: result.converted_by.clone(),
        }];
    }
    result
        .outcome
        .errors
        .iter()
        .map(|e| Event::ErrorRaised {
            segment_id: segment_id.to_string(),
            code: e.code.clone(),
        })
        .collect()
}

/// Reads every `.sql` file under `root`, converts each segment and records
/// outcomes, residuals and history.
pub fn run_migration(
    converter: &Converter,
    root: &Path,
    library: RuleLibrary,
    config: VerifyConfig,
) -> Result<SessionState> {
    let paths = sql_files(root)?;
    let mut state = SessionState {
        session_id: session_id_for(root),
        root: root.to_path_buf(),
        seed: config.seed,
        version: 0,
        files: Vec::new(),
        segments: Vec::new(),
        outcomes: BTreeMap::new(),
        io_failures: Vec::new(),
        library: library.clone(),
        pending: BTreeMap::new(),
        residuals: BTreeMap::new(),
        history: vec![Event::SessionStarted {
            root: root.to_path_buf(),
            seed: config.seed,
            library,
        }],
    };
    let mut unparsed = BTreeMap::new();
    for path in &paths {
        let rel = relative(root, path);
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                state.io_failures.push(IoFailure {
                    path: rel,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let (segments, failure) = segment_file_text(converter, &rel, &text);
        if let Some(message) = failure {
            unparsed.insert(segments[0].segment_id.clone(), message);
        }
        state.files.push(rel);
        state.segments.extend(segments);
    }
    let todo: Vec<&SqlSegment> = state
        .segments
        .iter()
        .filter(|s| !unparsed.contains_key(&s.segment_id))
        .collect();
    let learned: Vec<TransformRule> = state.library.learned().cloned().collect();
    let mut results = convert_all(converter, &todo, &learned, config).into_iter();
    for segment in &state.segments {
        let result = match unparsed.get(&segment.segment_id) {
            Some(message) => {
                let error = pseudo_error(segment, message.clone());
                SegmentResult {
                    outcome: BaselineOutcome {
                        status: crate::baseline::Status::Failed,
                        converted: None,
                        errors: vec![error.clone()],
                    },
                    converted_by: ConvertedBy::Unconverted,
                    baseline_errors: vec![error],
                    verification: None,
                }
            }
            None => results.next().expect("one result per parsed segment"),
        };
        state
            .history
            .extend(outcome_events(&segment.segment_id, &result));
        state.outcomes.insert(segment.segment_id.clone(), result);
    }
    state.refresh_residuals();
    Ok(state)
}

impl SessionState {
    fn refresh_residuals(&mut self) {
        self.residuals.clear();
        for segment in &self.segments {
            for e in &self.outcomes[&segment.segment_id].outcome.errors {
                self.residuals
                    .entry(e.code.clone())
                    .or_default()
                    .push(e.clone());
            }
        }
    }

    pub fn residual_count(&self) -> usize {
        self.residuals.values().map(Vec::len).sum()
    }

    pub fn segment(&self, segment_id: &str) -> Option<&SqlSegment> {
        self.segments.iter().find(|s| s.segment_id == segment_id)
    }

    fn config(&self) -> VerifyConfig {
        VerifyConfig {
            seed: self.seed,
            ..VerifyConfig::default()
        }
    }

    fn learned_with(&self, rule: &TransformRule) -> Vec<TransformRule> {
        let mut rules: Vec<TransformRule> = self
            .library
            .learned()
            .filter(|r| r.rule_id != rule.rule_id)
            .cloned()
            .collect();
        rules.push(rule.clone());
        rules
    }

    /// Failed segments whose current errors include `code`.
    fn failing_with(&self, code: &str) -> Vec<&SqlSegment> {
        self.segments
            .iter()
            .filter(|s| self.outcomes[&s.segment_id].codes().contains(code))
            .collect()
    }

    /// Induces a rule from a demonstration on a residual of `code` plus any
    /// pending demonstrations for it, and previews its effect. The library is
    /// not changed.
    pub fn submit_demonstration(
        &mut self,
        converter: &Converter,
        code: &str,
        target: &str,
        segment_id: Option<&str>,
    ) -> Result<RulePreview> {
        let residuals = self
            .residuals
            .get(code)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::NoResidual(code.to_string()))?;
        let target_ast = parse(target, &converter.dialects.tgt).map_err(Error::TargetParse)?;
        let pending = self.pending.get(code).cloned().unwrap_or_default();
        let segment_id = match segment_id {
            Some(id) => {
                if !residuals.iter().any(|e| e.segment_id == id) {
                    return Err(Error::NoResidual(format!("{code} in {id}")));
                }
                id.to_string()
            }
            None => {
                let mut ids: Vec<&String> = residuals.iter().map(|e| &e.segment_id).collect();
                ids.dedup();
                let fresh: Vec<&String> = ids
                    .iter()
                    .copied()
                    .filter(|id| !pending.iter().any(|p| &p.segment_id == *id))
                    .collect();
                let pool = if fresh.is_empty() { ids } else { fresh };
                pool.into_iter()
                    .min_by_key(|id| {
                        self.segment(id)
                            .map_or(usize::MAX, |s| distance(converter, &s.ast, &target_ast))
                    })
                    .expect("residual list is not empty")
                    .clone()
            }
        };
        let segment = self
            .segment(&segment_id)
            .ok_or_else(|| Error::UnknownSegment(segment_id.clone()))?;
        let demo = DemoRecord {
            demo_id: format!("{code}-demo-{}", pending.len() + 1),
            error_code: code.to_string(),
            source: segment.text.clone(),
            target: target.to_string(),
        };
        let mut records: Vec<DemoRecord> = pending.iter().map(|p| p.demo.clone()).collect();
        records.push(demo.clone());
        let demos = records
            .iter()
            .map(|r| Demonstration::from_record(converter, r))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let rule = induce_with(converter, &demos, self.library.next_learned_priority())?;
        self.apply(
            converter,
            Event::DemoSubmitted {
                demo,
                segment_id: segment_id.clone(),
            },
        );
        self.history.push(Event::RuleInduced {
            rule_id: rule.rule_id.clone(),
            version: self.version,
        });
        let sites = self.preview_sites(converter, code, &rule);
        Ok(RulePreview {
            session_id: self.session_id.clone(),
            version: self.version,
            code: code.to_string(),
            summary: rule.describe(),
            rule,
            demos: records,
            sites,
        })
    }

    fn preview_sites(
        &self,
        converter: &Converter,
        code: &str,
        rule: &TransformRule,
    ) -> Vec<PreviewSite> {
        let learned = self.learned_with(rule);
        let config = self.config();
        self.failing_with(code)
            .into_iter()
            .filter_map(|segment| {
                let conversion = converter.convert(segment, &learned);
                conversion.hits(&rule.rule_id).next()?;
                let residual_codes: Vec<String> = conversion
                    .outcome
                    .errors
                    .iter()
                    .map(|e| e.code.clone())
                    .collect();
                let converted = conversion.outcome.converted_text().map(str::to_string);
                let repair = repair_code(&self.outcomes[&segment.segment_id].baseline_errors);
                let verification = converted
                    .as_deref()
                    .map(|t| verify_with(segment, t, repair, &converter.dialects, config));
                Some(PreviewSite {
                    segment_id: segment.segment_id.clone(),
                    source: segment.text.clone(),
                    converted,
                    residual_codes,
                    verification,
                })
            })
            .collect()
    }

    fn check_fresh(&self, preview: &RulePreview) -> Result<()> {
        if preview.session_id != self.session_id {
            return Err(Error::Invalid(format!(
                "preview belongs to session {}, not {}",
                preview.session_id, self.session_id
            )));
        }
        if preview.version != self.version {
            return Err(Error::StalePreview {
                preview: preview.version,
                current: self.version,
            });
        }
        Ok(())
    }

    /// Adds the previewed rule to the library and re-runs failed segments.
    pub fn accept_rule(&mut self, converter: &Converter, preview: &RulePreview) -> Result<()> {
        self.check_fresh(preview)?;
        self.apply(
            converter,
            Event::RuleApplied {
                rule: preview.rule.clone(),
            },
        );
        Ok(())
    }

    /// Drops the previewed rule and its pending demonstrations.
    pub fn reject_rule(&mut self, converter: &Converter, preview: &RulePreview) -> Result<()> {
        self.check_fresh(preview)?;
        self.apply(
            converter,
            Event::RuleRejected {
                rule_id: preview.rule.rule_id.clone(),
                code: preview.code.clone(),
            },
        );
        Ok(())
    }

    /// Applies one state-changing event and records it with its consequences.
    fn apply(&mut self, converter: &Converter, event: Event) {
        match &event {
            Event::DemoSubmitted { demo, segment_id } => {
                self.pending
                    .entry(demo.error_code.clone())
                    .or_default()
                    .push(PendingDemo {
                        segment_id: segment_id.clone(),
                        demo: demo.clone(),
                    });
                self.version += 1;
                self.history.push(event);
            }
            Event::RuleRejected { code, .. } => {
                self.pending.remove(code);
                self.version += 1;
                self.history.push(event);
            }
            Event::RuleApplied { rule } => {
                if let Some(code) = &rule.trigger {
                    self.pending.remove(code);
                }
                self.library.insert(rule.clone());
                self.version += 1;
                self.history.push(event);
                self.rerun_failed(converter);
            }
            _ => self.history.push(event),
        }
    }

    fn rerun_failed(&mut self, converter: &Converter) {
        let learned: Vec<TransformRule> = self.library.learned().cloned().collect();
        let todo: Vec<&SqlSegment> = self
            .segments
            .iter()
            .filter(|s| {
                let r = &self.outcomes[&s.segment_id];
                !r.outcome.is_converted() && s.ast.node_count() > 1
            })
            .collect();
        let results = convert_all(converter, &todo, &learned, self.config());
        let ids: Vec<String> = todo.iter().map(|s| s.segment_id.clone()).collect();
        for (id, result) in ids.into_iter().zip(results) {
            let before = &self.outcomes[&id];
            if before.outcome.errors != result.outcome.errors
                || before.outcome.is_converted() != result.outcome.is_converted()
            {
                self.history.extend(outcome_events(&id, &result));
            }
            self.outcomes.insert(id, result);
        }
        self.refresh_residuals();
    }

    /// Rebuilds a session from its history.
    pub fn replay(converter: &Converter, history: &[Event]) -> Result<SessionState> {
        let Some(Event::SessionStarted {
            root,
            seed,
            library,
        }) = history.first()
        else {
            return Err(Error::Invalid(
                "history does not start with session_started".into(),
            ));
        };
        let config = VerifyConfig {
            seed: *seed,
            ..VerifyConfig::default()
        };
        let mut state = run_migration(converter, root, library.clone(), config)?;
        for event in &history[1..] {
            if !event.is_derived() {
                state.apply(converter, event.clone());
            }
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session serializes")
    }

    pub fn from_json(text: &str) -> Result<SessionState> {
        Ok(serde_json::from_str(text)?)
    }
}
