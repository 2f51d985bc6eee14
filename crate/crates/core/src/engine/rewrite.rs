use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::pattern::{instantiate, match_here, Binding, TransformRule};
use super::EngineError;
use crate::ast::{validate, AstNode, Path, Span};
use crate::dialect::DialectPair;
use crate::types::Scope;

/// A node flagged by a gap detector, plus the positions builtin rules must
/// leave alone while the gap is open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedSite {
    pub code: String,
    pub path: Path,
    pub protected: Vec<Path>,
}

pub trait Detector {
    fn flag(&self, tree: &AstNode, dialects: &DialectPair) -> Vec<FlaggedSite>;
}

/// One rewrite, located in the tree the pass started from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub rule_id: String,
    pub path: Path,
    pub span: Span,
}

fn prefix_related(a: &[usize], b: &[usize]) -> bool {
    a.starts_with(b) || b.starts_with(a)
}

fn permitted(rule: &TransformRule, path: &[usize], sites: Option<&[FlaggedSite]>) -> bool {
    let Some(sites) = sites else { return true };
    match &rule.trigger {
        Some(code) => sites
            .iter()
            .any(|s| &s.code == code && prefix_related(path, &s.path)),
        None => !sites.iter().any(|s| s.protected.iter().any(|p| p == path)),
    }
}

#[derive(Clone, Copy)]
pub struct Rewriter<'a> {
    pub dialects: &'a DialectPair,
    pub detector: Option<&'a dyn Detector>,
}

impl<'a> Rewriter<'a> {
    pub fn new(dialects: &'a DialectPair) -> Self {
        Rewriter {
            dialects,
            detector: None,
        }
    }

    pub fn gated(dialects: &'a DialectPair, detector: &'a dyn Detector) -> Self {
        Rewriter {
            dialects,
            detector: Some(detector),
        }
    }

    /// Non-overlapping matches of `rule`, outermost first.
    pub fn select(&self, rule: &TransformRule, tree: &AstNode) -> Vec<Binding> {
        let scope = Scope::from_tree(tree);
        let sites = self.detector.map(|d| d.flag(tree, self.dialects));
        let concrete = rule.pattern.concrete_paths();
        let mut taken: Vec<Path> = Vec::new();
        let mut out = Vec::new();
        for (path, node) in tree.walk() {
            if taken.contains(&path) || !permitted(rule, &path, sites.as_deref()) {
                continue;
            }
            let Some(binding) = match_here(&rule.pattern, node, &path) else {
                continue;
            };
            if !rule
                .guard
                .iter()
                .all(|g| g.holds(&binding, &scope, self.dialects))
            {
                continue;
            }
            taken.extend(concrete.iter().map(|c| {
                let mut p = path.clone();
                p.extend(c);
                p
            }));
            out.push(binding);
        }
        out
    }

    /// One pass of `rule` over `tree`.
    pub fn pass(
        &self,
        rule: &TransformRule,
        tree: &AstNode,
    ) -> Result<(AstNode, Vec<RewriteStep>), EngineError> {
        let sites = self.select(rule, tree);
        if sites.is_empty() {
            return Ok((tree.clone(), Vec::new()));
        }
        let by_path: HashMap<&[usize], &Binding> =
            sites.iter().map(|b| (b.root.as_slice(), b)).collect();
        let out = rebuild(rule, tree, &mut Vec::new(), &by_path)?;
        validate(&out).map_err(|detail| EngineError::Malformed {
            rule_id: rule.rule_id.clone(),
            detail,
        })?;
        let steps = sites
            .iter()
            .map(|b| RewriteStep {
                rule_id: rule.rule_id.clone(),
                path: b.root.clone(),
                span: b.match_span,
            })
            .collect();
        Ok((out, steps))
    }

    /// Runs passes of every rule, in (priority, rule_id) order, until none fires.
    pub fn fixpoint(
        &self,
        rules: &[TransformRule],
        tree: &AstNode,
    ) -> Result<(AstNode, Vec<RewriteStep>), EngineError> {
        let mut ordered: Vec<&TransformRule> = rules.iter().collect();
        ordered.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let bound = 10 * tree.node_count();
        let mut current = tree.clone();
        let mut trace = Vec::new();
        loop {
            let mut fired = false;
            for rule in &ordered {
                let (next, steps) = self.pass(rule, &current)?;
                if steps.is_empty() {
                    continue;
                }
                fired = true;
                trace.extend(steps);
                if trace.len() > bound {
                    return Err(EngineError::NonTermination {
                        rule_id: rule.rule_id.clone(),
                        rewrites: trace.len(),
                        bound,
                    });
                }
                current = next;
            }
            if !fired {
                return Ok((current, trace));
            }
        }
    }
}

fn rebuild(
    rule: &TransformRule,
    node: &AstNode,
    path: &mut Path,
    sites: &HashMap<&[usize], &Binding>,
) -> Result<AstNode, EngineError> {
    let mut children = Vec::with_capacity(node.children.len());
    for (i, c) in node.children.iter().enumerate() {
        path.push(i);
        children.push(rebuild(rule, c, path, sites)?);
        path.pop();
    }
    let rebuilt = AstNode::new(node.kind, node.token.clone(), children, node.span);
    let Some(binding) = sites.get(path.as_slice()) else {
        return Ok(rebuilt);
    };
    let resolve = |hole: &str| {
        binding
            .hole_paths
            .get(hole)
            .and_then(|p| rebuilt.get(p))
            .cloned()
    };
    instantiate(&rule.template, &resolve, node.span).map_err(|detail| EngineError::Malformed {
        rule_id: rule.rule_id.clone(),
        detail,
    })
}

/// Applies one pass of `rule` everywhere it matches. Returns the new tree and
/// the number of rewrites.
pub fn apply(rule: &TransformRule, tree: &AstNode) -> Result<(AstNode, usize), EngineError> {
    let (out, steps) = Rewriter::new(DialectPair::builtin_ref()).pass(rule, tree)?;
    Ok((out, steps.len()))
}

/// Rewrites to a fixpoint with every rule in `rules`.
pub fn apply_library(
    rules: &[TransformRule],
    tree: &AstNode,
) -> Result<(AstNode, Vec<RewriteStep>), EngineError> {
    Rewriter::new(DialectPair::builtin_ref()).fixpoint(rules, tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::NodeKind;
    use crate::dialect::DialectProfile;
    use crate::engine::pattern::{Guard, Origin, PatternNode, Provenance};
    use crate::parser::parse;

    fn rule(
        id: &str,
        pattern: PatternNode,
        template: PatternNode,
        guard: Vec<Guard>,
    ) -> TransformRule {
        TransformRule {
            rule_id: id.into(),
            trigger: None,
            pattern,
            guard,
            template,
            provenance: Provenance {
                origin: Origin::Builtin,
                demos: vec![],
            },
            priority: 0,
        }
    }

    fn plus(l: PatternNode, r: PatternNode) -> PatternNode {
        PatternNode::node(NodeKind::BinaryOp, Some("+"), vec![l, r])
    }

    fn concat_rule() -> TransformRule {
        rule(
            "concat",
            plus(PatternNode::hole("x"), PatternNode::hole("y")),
            PatternNode::node(
                NodeKind::FunctionCall,
                Some("CONCAT"),
                vec![
                    PatternNode::node(
                        NodeKind::FunctionCall,
                        Some("ISNULL"),
                        vec![
                            PatternNode::hole("x"),
                            PatternNode::node(NodeKind::StringLit, Some(""), vec![]),
                        ],
                    ),
                    PatternNode::hole("y"),
                ],
            ),
            vec![],
        )
    }

    fn src(text: &str) -> AstNode {
        parse(text, DialectProfile::src()).unwrap()
    }

    #[test]
    fn nested_matches_rewrite_bottom_up() {
        let (out, n) = apply(&concat_rule(), &src("SELECT (a + \"x\") + \"y\"")).unwrap();
        assert_eq!(n, 2);
        assert_eq!(
            out.children[0].children[0].sexpr(),
            "FunctionCall[CONCAT](FunctionCall[ISNULL](FunctionCall[CONCAT](FunctionCall[ISNULL](Identifier[a], StringLit[]), StringLit[x]), StringLit[]), StringLit[y])"
        );
    }

    #[test]
    fn guard_failure_leaves_tree_unchanged() {
        let mut r = concat_rule();
        r.guard = vec![Guard::is_nullable("x")];
        let tree = src("DECLARE a VARCHAR(5) NOT NULL = \"q\" SELECT a + \"x\"");
        let (out, n) = apply(&r, &tree).unwrap();
        assert_eq!(n, 0);
        assert_eq!(out, tree);
    }

    #[test]
    fn fixpoint_detects_runaway_rules() {
        let grow = rule(
            "grow",
            PatternNode::typed_hole("x", &[NodeKind::Identifier]),
            plus(
                PatternNode::hole("x"),
                PatternNode::node(NodeKind::NumberLit, Some("1"), vec![]),
            ),
            vec![],
        );
        let err = apply_library(&[grow], &src("SELECT a")).unwrap_err();
        assert!(matches!(err, EngineError::NonTermination { .. }));
    }

    #[test]
    fn template_spans_come_from_the_match() {
        let tree = src("SELECT a + \"x\"");
        let (out, _) = apply(&concat_rule(), &tree).unwrap();
        let before = &tree.children[0].children[0];
        let after = &out.children[0].children[0];
        assert_eq!(after.span, before.span);
        assert_eq!(after.children[1].span, before.children[1].span);
    }

    struct OnlyFirstItem;
    impl Detector for OnlyFirstItem {
        fn flag(&self, _: &AstNode, _: &DialectPair) -> Vec<FlaggedSite> {
            vec![FlaggedSite {
                code: "E001".into(),
                path: vec![0, 0],
                protected: vec![vec![0, 0]],
            }]
        }
    }

    #[test]
    fn gating_restricts_learned_and_builtin_rules() {
        let tree = src("SELECT a + \"x\", b + \"y\"");
        let pair = DialectPair::builtin();
        let rw = Rewriter::gated(&pair, &OnlyFirstItem);
        let (_, steps) = rw.pass(&concat_rule(), &tree).unwrap();
        assert_eq!(
            steps.iter().map(|s| s.path.clone()).collect::<Vec<_>>(),
            vec![vec![0, 1]]
        );
        let mut learned = concat_rule();
        learned.trigger = Some("E001".into());
        let (_, steps) = rw.pass(&learned, &tree).unwrap();
        assert_eq!(
            steps.iter().map(|s| s.path.clone()).collect::<Vec<_>>(),
            vec![vec![0, 0]]
        );
    }
}
