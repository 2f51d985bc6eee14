use std::sync::OnceLock;

use crate::ast::NodeKind;
use crate::dialect::{Arity, DialectPair, TypeClass};
use crate::engine::{Guard, Origin, PatternNode, Provenance, TransformRule, BUILTIN_PRIORITY};

fn builtin(
    rule_id: &str,
    pattern: PatternNode,
    template: PatternNode,
    guard: Vec<Guard>,
) -> TransformRule {
    TransformRule {
        rule_id: rule_id.to_string(),
        trigger: None,
        pattern,
        guard,
        template,
        provenance: Provenance {
            origin: Origin::Builtin,
            demos: Vec::new(),
        },
        priority: BUILTIN_PRIORITY,
    }
}

fn call(name: &str, args: Vec<PatternNode>) -> PatternNode {
    PatternNode::node(NodeKind::FunctionCall, Some(name), args)
}

fn holes(n: usize) -> Vec<PatternNode> {
    const NAMES: [&str; 3] = ["x", "y", "z"];
    (0..n)
        .map(|i| match NAMES.get(i) {
            Some(name) => PatternNode::hole(name),
            None => PatternNode::hole(&format!("h{i}")),
        })
        .collect()
}

/// The hand-written rule set of the baseline converter.
pub fn builtin_rules(dialects: &DialectPair) -> Vec<TransformRule> {
    let (x, y, z) = (
        PatternNode::hole("x"),
        PatternNode::hole("y"),
        PatternNode::hole("z"),
    );
    let plus = PatternNode::node(NodeKind::BinaryOp, Some("+"), vec![x.clone(), y.clone()]);
    let concat = call(
        &dialects
            .tgt
            .function("concat")
            .map_or("CONCAT".into(), |f| f.name.clone()),
        vec![x.clone(), y.clone()],
    );
    let src_init = dialects.src.declare_initializer.token();
    let tgt_init = dialects.tgt.declare_initializer.token();
    let mut rules = vec![
        builtin(
            "builtin-concat-left",
            plus.clone(),
            concat.clone(),
            vec![Guard::has_type("x", TypeClass::String)],
        ),
        builtin(
            "builtin-concat-right",
            plus,
            concat,
            vec![Guard::has_type("y", TypeClass::String)],
        ),
        builtin(
            "builtin-declare-initializer",
            PatternNode::node(
                NodeKind::DeclareStmt,
                Some(src_init),
                vec![x.clone(), y.clone(), z.clone()],
            ),
            PatternNode::node(
                NodeKind::DeclareStmt,
                Some(tgt_init),
                vec![x.clone(), y.clone(), z],
            ),
            vec![],
        ),
        builtin(
            "builtin-row-limit",
            PatternNode::node(
                NodeKind::LimitClause,
                Some(dialects.src.row_limit.token()),
                vec![PatternNode::typed_hole("x", &[NodeKind::NumberLit])],
            ),
            PatternNode::node(
                NodeKind::LimitClause,
                Some(dialects.tgt.row_limit.token()),
                vec![x.clone()],
            ),
            vec![],
        ),
    ];
    if let (Some(coalesce), Some(_)) = (
        dialects.src.function("coalesce"),
        dialects.src.function("null_coalesce"),
    ) {
        if dialects.tgt.function("coalesce").is_none() {
            rules.push(builtin(
                "builtin-coalesce",
                call(&coalesce.name, vec![x.clone(), y.clone()]),
                call(&dialects.tgt.null_coalesce_fn.name, vec![x, y]),
                vec![],
            ));
        }
    }
    for (canonical, spec) in &dialects.src.function_catalog {
        let Some(target) = dialects.tgt.function(canonical) else {
            continue;
        };
        let Arity::Exact(n) = spec.arity else {
            continue;
        };
        if target.name == spec.name || spec.type_arg || !target.arity.accepts(n) {
            continue;
        }
        rules.push(builtin(
            &format!("builtin-rename-{canonical}"),
            call(&spec.name, holes(n)),
            call(&target.name, holes(n)),
            vec![],
        ));
    }
    rules.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    rules
}

/// [`builtin_rules`] for the shipped profiles.
pub fn default_rules() -> &'static [TransformRule] {
    static RULES: OnceLock<Vec<TransformRule>> = OnceLock::new();
    RULES.get_or_init(|| builtin_rules(DialectPair::builtin_ref()))
}
