//! Guarded tree-rewrite rules: patterns with holes, matching, bottom-up
//! application and fixpoint iteration over a rule library.

mod library;
mod pattern;
mod rewrite;

use thiserror::Error;

pub use library::RuleLibrary;
pub use pattern::{
    find_matches, instantiate, match_here, Binding, Guard, Origin, PatternNode, Predicate,
    Provenance, TransformRule, BUILTIN_PRIORITY, LEARNED_PRIORITY,
};
pub use rewrite::{apply, apply_library, Detector, FlaggedSite, RewriteStep, Rewriter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("rewriting did not terminate: {rewrites} rewrites exceed the bound of {bound} (last rule {rule_id})")]
    NonTermination {
        rule_id: String,
        rewrites: usize,
        bound: usize,
    },
    #[error("rule {rule_id} produced a malformed tree: {detail}")]
    Malformed { rule_id: String, detail: String },
}
