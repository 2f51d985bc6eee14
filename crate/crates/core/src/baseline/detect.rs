use crate::ast::{AstNode, NodeKind, Path};
use crate::dialect::{DialectPair, TypeClass};
use crate::engine::{Detector, FlaggedSite};
use crate::types::Scope;

/// One offending subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub code: &'static str,
    pub path: Path,
    /// Absolute paths builtin rules must not rewrite, `path` included.
    pub spine: Vec<Path>,
}

struct Cx<'a> {
    scope: Scope,
    dialects: &'a DialectPair,
}

impl Cx<'_> {
    fn ty(&self, n: &AstNode) -> Option<TypeClass> {
        self.scope.type_of(n, self.dialects)
    }

    fn stringish(&self, n: &AstNode) -> bool {
        self.ty(n) == Some(TypeClass::String)
    }

    /// NULL literal, or a declared nullable identifier that is not clearly non-string.
    fn nullable_operand(&self, n: &AstNode) -> bool {
        match n.kind {
            NodeKind::NullLit => true,
            NodeKind::Identifier => n
                .token()
                .and_then(|t| self.scope.get(t))
                .is_some_and(|d| d.nullable() && matches!(d.class, None | Some(TypeClass::String))),
            _ => false,
        }
    }

    fn canonical(&self, n: &AstNode) -> Option<&str> {
        if n.kind != NodeKind::FunctionCall {
            return None;
        }
        self.dialects.canonical(n.token()?).map(|(c, _)| c)
    }
}

fn is_op(n: &AstNode, op: &str) -> bool {
    n.kind == NodeKind::BinaryOp && n.token() == Some(op)
}

fn is_comparison(n: &AstNode) -> bool {
    n.kind == NodeKind::BinaryOp
        && matches!(n.token(), Some("=" | "<>" | "!=" | "<" | ">" | "<=" | ">="))
}

/// Operands of a `+` chain and the relative paths of its `+` nodes.
fn chain<'a>(n: &'a AstNode, path: &mut Path, ops: &mut Vec<&'a AstNode>, spine: &mut Vec<Path>) {
    if is_op(n, "+") {
        spine.push(path.clone());
        for (i, c) in n.children.iter().enumerate() {
            path.push(i);
            chain(c, path, ops, spine);
            path.pop();
        }
    } else {
        ops.push(n);
    }
}

fn classify(n: &AstNode, parent: Option<&AstNode>, cx: &Cx) -> Option<(&'static str, Vec<Path>)> {
    let here = vec![Vec::new()];
    let top_of_plus = is_op(n, "+") && !parent.is_some_and(|p| is_op(p, "+"));
    if top_of_plus {
        let (mut ops, mut spine) = (Vec::new(), Vec::new());
        chain(n, &mut Vec::new(), &mut ops, &mut spine);
        let stringy = ops.iter().any(|o| cx.stringish(o));
        let nullable = ops.iter().any(|o| cx.nullable_operand(o));
        if ops.len() == 2 && stringy && nullable {
            return Some(("E001", here));
        }
        if ops.len() >= 3 && stringy && nullable {
            return Some(("E002", spine));
        }
    }
    match cx.canonical(n) {
        Some("coalesce") if n.children.len() > 2 => return Some(("E003", here)),
        Some("iif") => return Some(("E004", here)),
        Some("convert") => return Some(("E005", here)),
        Some("current_timestamp")
            if n.token() == Some("GETDATE")
                && parent.is_some_and(|p| {
                    is_comparison(p)
                        || matches!(p.kind, NodeKind::FunctionCall | NodeKind::CaseExpr)
                }) =>
        {
            return Some(("E007", here))
        }
        _ => {}
    }
    if is_op(n, "+")
        && cx.ty(&n.children[0]) == Some(TypeClass::Date)
        && cx.ty(&n.children[1]) == Some(TypeClass::Number)
    {
        return Some(("E006", here));
    }
    if n.kind == NodeKind::LimitClause
        && n.token() == Some("TOP")
        && n.children
            .first()
            .is_some_and(|c| c.kind != NodeKind::NumberLit)
    {
        return Some(("E008", here));
    }
    if is_op(n, ".") && !parent.is_some_and(|p| is_op(p, ".")) {
        let mut spine = Vec::new();
        chain_dots(n, &mut Vec::new(), &mut spine);
        return Some(("E009", spine));
    }
    if is_op(n, "+") {
        let types = [cx.ty(&n.children[0]), cx.ty(&n.children[1])];
        if types.contains(&Some(TypeClass::String)) && types.contains(&Some(TypeClass::Number)) {
            return Some(("E010", here));
        }
    }
    if matches!(n.token(), Some("=" | "<>" | "!=")) && n.kind == NodeKind::BinaryOp {
        let bools = n
            .children
            .iter()
            .filter(|c| c.kind == NodeKind::BoolLit)
            .count();
        if bools == 1 {
            return Some(("E011", here));
        }
    }
    None
}

fn chain_dots(n: &AstNode, path: &mut Path, spine: &mut Vec<Path>) {
    if is_op(n, ".") {
        spine.push(path.clone());
        for (i, c) in n.children.iter().enumerate() {
            path.push(i);
            chain_dots(c, path, spine);
            path.pop();
        }
    }
}

/// Every gap-list construct in `tree`, pre-order. A node carries at most one
/// code, the first matching in registry order.
pub fn detect(tree: &AstNode, dialects: &DialectPair) -> Vec<Detection> {
    let cx = Cx {
        scope: Scope::from_tree(tree),
        dialects,
    };
    let mut out: Vec<Detection> = Vec::new();
    for (path, node) in tree.walk() {
        let parent = path.split_last().and_then(|(_, up)| tree.get(up));
        if let Some((code, rel)) = classify(node, parent, &cx) {
            let spine = rel
                .into_iter()
                .map(|r| {
                    let mut p = path.clone();
                    p.extend(r);
                    p
                })
                .collect();
            out.push(Detection { code, path, spine });
        }
    }
    out
}

/// The baseline gap list as an engine gate.
#[derive(Debug, Clone, Copy, Default)]
pub struct GapDetector;

impl Detector for GapDetector {
    fn flag(&self, tree: &AstNode, dialects: &DialectPair) -> Vec<FlaggedSite> {
        detect(tree, dialects)
            .into_iter()
            .map(|d| FlaggedSite {
                code: d.code.to_string(),
                path: d.path,
                protected: d.spine,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::DialectProfile;
    use crate::parser::parse;

    fn codes(text: &str) -> Vec<&'static str> {
        let tree = parse(text, DialectProfile::src()).unwrap();
        detect(&tree, &DialectPair::builtin())
            .into_iter()
            .map(|d| d.code)
            .collect()
    }

    #[test]
    fn each_class_has_a_trigger() {
        assert_eq!(
            codes("DECLARE v VARCHAR(20) = NULL SELECT v + \"s\""),
            ["E001"]
        );
        assert_eq!(
            codes("DECLARE v VARCHAR(20) = NULL SELECT v + \"s\" + \"t\""),
            ["E002"]
        );
        assert_eq!(codes("SELECT COALESCE(a, b, c)"), ["E003"]);
        assert_eq!(codes("SELECT IIF(a > 1, 1, 0)"), ["E004"]);
        assert_eq!(codes("SELECT CONVERT(VARCHAR(10), a)"), ["E005"]);
        assert_eq!(codes("DECLARE d DATE = GETDATE() SELECT d + 7"), ["E006"]);
        assert_eq!(
            codes("SELECT CASE WHEN d < GETDATE() THEN 1 ELSE 0 END"),
            ["E007"]
        );
        assert_eq!(codes("SELECT TOP (n) a FROM t"), ["E008"]);
        assert_eq!(codes("SELECT dbo.price FROM items"), ["E009"]);
        assert_eq!(
            codes("DECLARE n INT NOT NULL = 1 SELECT \"id\" + n"),
            ["E010"]
        );
        assert_eq!(codes("SELECT flag = TRUE"), ["E011"]);
    }

    #[test]
    fn supported_constructs_are_not_flagged() {
        assert!(codes("SELECT GETDATE(), LEN(\"x\"), COALESCE(a, b) FROM t").is_empty());
        assert!(
            codes("DECLARE v VARCHAR(5) NOT NULL = \"q\" SELECT TOP 5 v + \"s\" + \"t\"")
                .is_empty()
        );
    }

    #[test]
    fn qualified_chains_flag_once() {
        let tree = parse("SELECT dbo.t.c", DialectProfile::src()).unwrap();
        let d = detect(&tree, &DialectPair::builtin());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].spine.len(), 2);
    }
}
