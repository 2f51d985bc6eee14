//! The rule-based baseline converter and its gap list.
//!
//! Supported constructs are rewritten by a fixed set of [`TransformRule`]s.
//! Constructs on the gap list are left in place and reported as
//! [`ConversionError`]s; learned rules may later repair exactly those sites.

mod detect;
mod registry;
mod rules;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use detect::{detect, Detection, GapDetector};
pub use registry::{
    gap_class, gap_list, is_intentional_repair, GapClass, GuardRecipe, PARSE_FAILURE, REGISTRY,
};
pub use rules::{builtin_rules, default_rules};

use crate::ast::{AstNode, Span, SqlSegment};
use crate::dialect::DialectPair;
use crate::engine::{EngineError, RewriteStep, Rewriter, TransformRule};
use crate::parser::parse;
use crate::printer::print;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converted,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionError {
    pub code: String,
    pub message: String,
    pub span: Span,
    pub segment_id: String,
    pub construct: AstNode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineOutcome {
    pub status: Status,
    pub converted: Option<SqlSegment>,
    pub errors: Vec<ConversionError>,
}

impl BaselineOutcome {
    pub fn is_converted(&self) -> bool {
        self.status == Status::Converted
    }

    pub fn converted_text(&self) -> Option<&str> {
        self.converted.as_ref().map(|s| s.text.as_str())
    }

    fn failed(errors: Vec<ConversionError>) -> Self {
        BaselineOutcome {
            status: Status::Failed,
            converted: None,
            errors,
        }
    }
}

/// Outcome plus the rewritten tree and the rewrites that produced it.
#[derive(Debug, Clone)]
pub struct Conversion {
    pub outcome: BaselineOutcome,
    pub tree: AstNode,
    pub trace: Vec<RewriteStep>,
}

impl Conversion {
    /// Rewrites performed by rules in `rules`.
    pub fn hits<'a>(&'a self, rule_id: &'a str) -> impl Iterator<Item = &'a RewriteStep> + 'a {
        self.trace.iter().filter(move |s| s.rule_id == rule_id)
    }
}

#[derive(Debug, Clone)]
pub struct Converter {
    pub dialects: DialectPair,
    pub builtins: Vec<TransformRule>,
}

impl Default for Converter {
    fn default() -> Self {
        Converter::new(DialectPair::builtin())
    }
}

impl Converter {
    pub fn new(dialects: DialectPair) -> Self {
        let builtins = builtin_rules(&dialects);
        Converter { dialects, builtins }
    }

    pub fn shared() -> &'static Converter {
        static CONVERTER: OnceLock<Converter> = OnceLock::new();
        CONVERTER.get_or_init(Converter::default)
    }

    fn rewriter(&self) -> Rewriter<'_> {
        Rewriter::gated(&self.dialects, &GapDetector)
    }

    /// Builtin rules only, to a fixpoint.
    pub fn normalize(&self, tree: &AstNode) -> Result<(AstNode, Vec<RewriteStep>), EngineError> {
        self.rewriter().fixpoint(&self.builtins, tree)
    }

    /// Builtin fixpoint, then builtin and `learned` rules together.
    pub fn rewrite(
        &self,
        tree: &AstNode,
        learned: &[TransformRule],
    ) -> Result<(AstNode, Vec<RewriteStep>), EngineError> {
        let (tree, mut trace) = self.normalize(tree)?;
        if learned.is_empty() {
            return Ok((tree, trace));
        }
        let mut all = self.builtins.clone();
        all.extend(learned.iter().cloned());
        let (tree, more) = self.rewriter().fixpoint(&all, &tree)?;
        trace.extend(more);
        Ok((tree, trace))
    }

    pub fn detect(&self, tree: &AstNode) -> Vec<Detection> {
        detect(tree, &self.dialects)
    }

    pub fn convert(&self, segment: &SqlSegment, learned: &[TransformRule]) -> Conversion {
        let (tree, trace) = match self.rewrite(&segment.ast, learned) {
            Ok(done) => done,
            Err(e) => {
                return Conversion {
                    outcome: BaselineOutcome::failed(vec![pseudo_error(segment, e.to_string())]),
                    tree: segment.ast.clone(),
                    trace: Vec::new(),
                }
            }
        };
        let detections = self.detect(&tree);
        let outcome = if detections.is_empty() {
            self.emit(segment, &tree)
        } else {
            let errors = detections
                .into_iter()
                .map(|d| {
                    let node = tree.get(&d.path).expect("detections point into the tree");
                    conversion_error(segment, d.code, node)
                })
                .collect();
            BaselineOutcome::failed(errors)
        };
        Conversion {
            outcome,
            tree,
            trace,
        }
    }

    fn emit(&self, segment: &SqlSegment, tree: &AstNode) -> BaselineOutcome {
        let printed = print(tree, &self.dialects.tgt).map_err(|e| e.to_string());
        let reparsed = printed.and_then(|text| match parse(&text, &self.dialects.tgt) {
            Ok(ast) => Ok((text, ast)),
            Err(e) => Err(format!("output does not parse: {e}")),
        });
        match reparsed {
            Ok((text, ast)) => BaselineOutcome {
                status: Status::Converted,
                converted: Some(SqlSegment {
                    segment_id: segment.segment_id.clone(),
                    dialect: self.dialects.tgt.name.clone(),
                    text,
                    ast,
                }),
                errors: Vec::new(),
            },
            Err(detail) => BaselineOutcome::failed(vec![pseudo_error(segment, detail)]),
        }
    }
}

pub fn conversion_error(segment: &SqlSegment, code: &str, node: &AstNode) -> ConversionError {
    let expr = segment
        .text
        .get(node.span.byte_start..node.span.byte_end)
        .map(str::to_string)
        .unwrap_or_else(|| node.sexpr());
    let message = gap_class(code).map_or_else(|| expr.clone(), |g| g.message_for(&expr));
    ConversionError {
        code: code.to_string(),
        message,
        span: node.span,
        segment_id: segment.segment_id.clone(),
        construct: node.clone(),
    }
}

/// E000 error covering the whole segment.
pub fn pseudo_error(segment: &SqlSegment, message: String) -> ConversionError {
    ConversionError {
        code: PARSE_FAILURE.to_string(),
        message,
        span: Span::new(0, segment.text.len(), 1),
        segment_id: segment.segment_id.clone(),
        construct: segment.ast.clone(),
    }
}

/// Converts with the builtin rules only.
pub fn baseline_convert(segment: &SqlSegment) -> BaselineOutcome {
    Converter::shared().convert(segment, &[]).outcome
}

#[derive(Serialize)]
struct ReportLine<'a> {
    segment_id: &'a str,
    code: &'a str,
    message: &'a str,
    span: Span,
}

/// One JSON object per error, one per line.
pub fn report_lines<'a>(outcomes: impl IntoIterator<Item = &'a BaselineOutcome>) -> String {
    let mut out = String::new();
    for e in outcomes.into_iter().flat_map(|o| &o.errors) {
        let line = ReportLine {
            segment_id: &e.segment_id,
            code: &e.code,
            message: &e.message,
            span: e.span,
        };
        out.push_str(&serde_json::to_string(&line).expect("report line serializes"));
        out.push('\n');
    }
    out
}
