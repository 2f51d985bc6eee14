//! Static facts read off a tree: declared types and nullability.

use std::collections::BTreeMap;

use crate::ast::{AstNode, NodeKind};
use crate::dialect::{DialectPair, TypeClass};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub type_name: String,
    pub class: Option<TypeClass>,
    pub not_null: bool,
    pub init_null: bool,
    pub has_init: bool,
}

impl Declaration {
    /// Declared without NOT NULL, or initialized to NULL.
    pub fn nullable(&self) -> bool {
        !self.not_null || self.init_null
    }
}

/// Declarations visible in a segment, keyed by lowercase name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    decls: BTreeMap<String, Declaration>,
}

impl Scope {
    pub fn from_tree(tree: &AstNode) -> Scope {
        let mut decls = BTreeMap::new();
        for (_, node) in tree.walk() {
            if node.kind != NodeKind::DeclareStmt || node.children.len() < 2 {
                continue;
            }
            let name = node.children[0].token().unwrap_or("").to_ascii_lowercase();
            let type_name = node.children[1].token().unwrap_or("").to_string();
            let init = node.children.get(2);
            decls.insert(
                name,
                Declaration {
                    class: TypeClass::of_type_name(&type_name),
                    not_null: type_name.ends_with("NOT NULL"),
                    init_null: init.is_some_and(|i| i.kind == NodeKind::NullLit),
                    has_init: init.is_some(),
                    type_name,
                },
            );
        }
        Scope { decls }
    }

    pub fn get(&self, name: &str) -> Option<&Declaration> {
        self.decls.get(&name.to_ascii_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Declaration)> {
        self.decls.iter()
    }

    pub fn type_of(&self, node: &AstNode, dialects: &DialectPair) -> Option<TypeClass> {
        type_of(node, self, dialects)
    }

    pub fn is_nullable(&self, node: &AstNode, dialects: &DialectPair) -> bool {
        is_nullable(node, self, dialects)
    }
}

pub fn type_of(node: &AstNode, scope: &Scope, dialects: &DialectPair) -> Option<TypeClass> {
    let child = |i: usize| {
        node.children
            .get(i)
            .and_then(|c| type_of(c, scope, dialects))
    };
    match node.kind {
        NodeKind::StringLit => Some(TypeClass::String),
        NodeKind::NumberLit => Some(TypeClass::Number),
        NodeKind::BoolLit => Some(TypeClass::Bool),
        NodeKind::Identifier => scope.get(node.token()?).and_then(|d| d.class),
        NodeKind::Alias => child(0),
        NodeKind::CastExpr => TypeClass::of_type_name(node.children.get(1)?.token()?),
        NodeKind::CaseExpr => {
            let n = node.children.len();
            let branches: Vec<TypeClass> = (0..n)
                .filter(|i| i % 2 == 1 || (node.token() == Some("ELSE") && *i == n - 1))
                .filter_map(child)
                .collect();
            if branches.contains(&TypeClass::String) {
                return Some(TypeClass::String);
            }
            branches.first().copied()
        }
        NodeKind::BinaryOp => {
            let (l, r) = (child(0), child(1));
            match node.token()? {
                "||" => Some(TypeClass::String),
                "=" | "<>" | "!=" | "<" | ">" | "<=" | ">=" => Some(TypeClass::Bool),
                "+" => {
                    if l == Some(TypeClass::String) || r == Some(TypeClass::String) {
                        Some(TypeClass::String)
                    } else if l == Some(TypeClass::Date) || r == Some(TypeClass::Date) {
                        Some(TypeClass::Date)
                    } else if l == Some(TypeClass::Number) && r == Some(TypeClass::Number) {
                        Some(TypeClass::Number)
                    } else {
                        None
                    }
                }
                "-" => {
                    if l == Some(TypeClass::Date) && r != Some(TypeClass::Date) {
                        Some(TypeClass::Date)
                    } else {
                        Some(TypeClass::Number)
                    }
                }
                "*" | "/" => Some(TypeClass::Number),
                _ => None,
            }
        }
        NodeKind::FunctionCall => {
            let (canonical, spec) = dialects.canonical(node.token()?)?;
            if spec.returns.is_some() {
                return spec.returns;
            }
            match canonical {
                "convert" => TypeClass::of_type_name(node.children.first()?.token()?),
                "iif" => child(1).or_else(|| child(2)),
                _ => (0..node.children.len()).find_map(child),
            }
        }
        _ => None,
    }
}

pub fn is_nullable(node: &AstNode, scope: &Scope, dialects: &DialectPair) -> bool {
    let any = |nodes: &[AstNode]| nodes.iter().any(|c| is_nullable(c, scope, dialects));
    match node.kind {
        NodeKind::NullLit => true,
        NodeKind::Identifier => node
            .token()
            .and_then(|t| scope.get(t))
            .is_some_and(Declaration::nullable),
        NodeKind::BinaryOp => node.token() != Some(".") && any(&node.children),
        NodeKind::Alias | NodeKind::CastExpr => is_nullable(&node.children[0], scope, dialects),
        NodeKind::CaseExpr => {
            let n = node.children.len();
            let has_else = node.token() == Some("ELSE");
            let results = node
                .children
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 2 == 1 || (has_else && *i == n - 1));
            !has_else
                || results
                    .into_iter()
                    .any(|(_, c)| is_nullable(c, scope, dialects))
        }
        NodeKind::FunctionCall => {
            let canonical = node
                .token()
                .and_then(|t| dialects.canonical(t))
                .map(|(c, _)| c);
            match canonical {
                Some("null_coalesce" | "coalesce") => node
                    .children
                    .iter()
                    .all(|c| is_nullable(c, scope, dialects)),
                Some("iif") => node.children[1..]
                    .iter()
                    .any(|c| is_nullable(c, scope, dialects)),
                Some("convert") => any(&node.children[1..]),
                _ => any(&node.children),
            }
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::DialectProfile;
    use crate::parser::parse;

    fn item(text: &str) -> (AstNode, Scope) {
        let ast = parse(text, DialectProfile::src()).unwrap();
        let scope = Scope::from_tree(&ast);
        let sel = ast.children.last().unwrap().children[0].clone();
        (sel, scope)
    }

    #[test]
    fn nullability_follows_declarations() {
        let d = DialectPair::builtin();
        let (e, s) = item("DECLARE var1 VARCHAR(20) = NULL SELECT var1");
        assert!(s.is_nullable(&e, &d));
        let (e, s) = item("DECLARE v VARCHAR(20) NOT NULL = \"a\" SELECT v");
        assert!(!s.is_nullable(&e, &d));
        let (e, s) = item("DECLARE v VARCHAR(20) SELECT v");
        assert!(s.is_nullable(&e, &d));
        let (e, s) = item("SELECT column_a");
        assert!(!s.is_nullable(&e, &d));
        let (e, s) = item("DECLARE v INT = NULL SELECT ISNULL(v, 0)");
        assert!(!s.is_nullable(&e, &d));
    }

    #[test]
    fn types_follow_declarations_and_literals() {
        let d = DialectPair::builtin();
        let (e, s) = item("DECLARE due DATETIME SELECT due + 7");
        assert_eq!(s.type_of(&e, &d), Some(TypeClass::Date));
        let (e, s) = item("DECLARE q INT SELECT \"n: \" + q");
        assert_eq!(s.type_of(&e, &d), Some(TypeClass::String));
        let (e, s) = item("SELECT CONVERT(INT, x)");
        assert_eq!(s.type_of(&e, &d), Some(TypeClass::Number));
        let (e, s) = item("SELECT a + b");
        assert_eq!(s.type_of(&e, &d), None);
    }
}
