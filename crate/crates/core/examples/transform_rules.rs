//! Hand-written rules: match, rewrite to a fixpoint, and round-trip a library
//! through JSON.

use sqlmigrate::ast::NodeKind;
use sqlmigrate::dialect::DialectProfile;
use sqlmigrate::engine::{
    apply, apply_library, find_matches, Guard, Origin, PatternNode, Provenance, RuleLibrary,
    TransformRule, LEARNED_PRIORITY,
};
use sqlmigrate::parser::parse;

fn rule(id: &str, pattern: PatternNode, guard: Vec<Guard>, template: PatternNode) -> TransformRule {
    TransformRule {
        rule_id: id.to_string(),
        trigger: None,
        pattern,
        guard,
        template,
        provenance: Provenance {
            origin: Origin::Learned,
            demos: vec![],
        },
        priority: LEARNED_PRIORITY,
    }
}

fn call(name: &str, args: Vec<PatternNode>) -> PatternNode {
    PatternNode::node(NodeKind::FunctionCall, Some(name), args)
}

fn main() -> sqlmigrate::Result<()> {
    let (a, b, c, x) = (
        PatternNode::hole("a"),
        PatternNode::hole("b"),
        PatternNode::hole("c"),
        PatternNode::hole("x"),
    );

    // IIF(c, a, b) => CASE WHEN c THEN a ELSE b END
    let iif = rule(
        "iif-to-case",
        call("IIF", vec![c.clone(), a.clone(), b.clone()]),
        vec![],
        PatternNode::node(NodeKind::CaseExpr, Some("ELSE"), vec![c, a, b]),
    );
    let upper = rule(
        "collapse-upper",
        call("UPPER", vec![call("UPPER", vec![x.clone()])]),
        vec![Guard::kind_is("x", NodeKind::Identifier)],
        call("UPPER", vec![x]),
    );

    let tree = parse(
        "SELECT IIF(a > 1, UPPER(UPPER(b)), \"-\") FROM t",
        DialectProfile::src(),
    )?;
    for m in find_matches(&iif.pattern, &tree) {
        println!("{} matches at {:?}", iif.rule_id, m.root);
    }

    let (once, n) = apply(&iif, &tree)?;
    println!("{n} rewrite(s): {}", once.sexpr());

    let library = RuleLibrary {
        rules: vec![iif, upper],
    };
    let (done, steps) = apply_library(&library.rules, &tree)?;
    println!("{} step(s): {}", steps.len(), done.sexpr());

    let back = RuleLibrary::from_json(&library.to_json())?;
    assert_eq!(back, library);
    for r in &back.rules {
        println!("{}: {}", r.rule_id, r.describe());
    }
    Ok(())
}
