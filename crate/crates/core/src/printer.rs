//! Canonical, dialect-aware pretty printer.
//!
//! Output uses uppercase keywords, single spaces and one statement per line.
//! Nodes that rely on a variant point the dialect does not have are reported
//! as [`PrintError::UnprintableNode`] instead of being silently rewritten.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{AstNode, NodeKind, Span};
use crate::dialect::{DialectProfile, IdentifierQuote, RowLimit, StringConcat};
use crate::parser::{is_evident_string, is_keyword};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum PrintError {
    #[error("cannot print {kind} in {dialect}: {detail}")]
    UnprintableNode {
        kind: NodeKind,
        dialect: String,
        detail: String,
        span: Span,
    },
}

pub fn print(ast: &AstNode, dialect: &DialectProfile) -> Result<String, PrintError> {
    Printer { dialect }.node(ast)
}

struct Printer<'a> {
    dialect: &'a DialectProfile,
}

fn precedence(node: &AstNode) -> u8 {
    if node.kind != NodeKind::BinaryOp {
        return 10;
    }
    match node.token().unwrap_or("") {
        "=" | "<>" | "!=" | "<" | ">" | "<=" | ">=" => 1,
        "+" | "-" | "||" => 2,
        "*" | "/" => 3,
        "." => 9,
        _ => 0,
    }
}

fn is_plain_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    let first_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_' || c == '@');
    first_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_keyword(name)
}

impl Printer<'_> {
    fn unprintable(&self, node: &AstNode, detail: impl Into<String>) -> PrintError {
        PrintError::UnprintableNode {
            kind: node.kind,
            dialect: self.dialect.name.clone(),
            detail: detail.into(),
            span: node.span,
        }
    }

    fn node(&self, node: &AstNode) -> Result<String, PrintError> {
        match node.kind {
            NodeKind::Script => {
                let stmts: Result<Vec<_>, _> = node.children.iter().map(|c| self.node(c)).collect();
                Ok(stmts?.join("\n"))
            }
            NodeKind::DeclareStmt => self.declare(node),
            NodeKind::SelectStmt => self.select(node),
            NodeKind::LimitClause => Err(self.unprintable(node, "row limit outside SELECT")),
            _ => self.expr(node),
        }
    }

    fn declare(&self, node: &AstNode) -> Result<String, PrintError> {
        let name = self.identifier(&node.children[0]);
        let ty = node.children[1].token().unwrap_or("");
        let mut out = format!("DECLARE {name} {ty}");
        if let Some(init) = node.children.get(2) {
            let want = self.dialect.declare_initializer.token();
            if node.token() != Some(want) {
                return Err(self.unprintable(
                    node,
                    format!(
                        "initializer `{}` (expected `{want}`)",
                        node.token().unwrap_or("")
                    ),
                ));
            }
            out.push(' ');
            out.push_str(want);
            out.push(' ');
            out.push_str(&self.expr(init)?);
        }
        Ok(out)
    }

    fn select(&self, node: &AstNode) -> Result<String, PrintError> {
        let (items, limit) = match node.children.last() {
            Some(l) if l.kind == NodeKind::LimitClause => {
                (&node.children[..node.children.len() - 1], Some(l))
            }
            _ => (&node.children[..], None),
        };
        let mut out = String::from("SELECT ");
        let mut suffix = String::new();
        if let Some(limit) = limit {
            let want = self.dialect.row_limit.token();
            if limit.token() != Some(want) {
                return Err(self.unprintable(
                    limit,
                    format!(
                        "row limit `{}` (expected `{want}`)",
                        limit.token().unwrap_or("")
                    ),
                ));
            }
            let count = &limit.children[0];
            match self.dialect.row_limit {
                RowLimit::TopPrefix => {
                    if count.kind == NodeKind::NumberLit {
                        out.push_str(&format!("TOP {} ", self.expr(count)?));
                    } else {
                        out.push_str(&format!("TOP ({}) ", self.expr(count)?));
                    }
                }
                RowLimit::LimitSuffix => {
                    if !matches!(count.kind, NodeKind::NumberLit | NodeKind::Identifier) {
                        return Err(self.unprintable(limit, "LIMIT takes a number or a variable"));
                    }
                    suffix = format!(" LIMIT {}", self.expr(count)?);
                }
            }
        }
        let items: Result<Vec<_>, _> = items.iter().map(|i| self.expr(i)).collect();
        out.push_str(&items?.join(", "));
        if let Some(table) = node.token() {
            out.push_str(" FROM ");
            out.push_str(&self.identifier_text(table));
        }
        out.push_str(&suffix);
        Ok(out)
    }

    fn identifier(&self, node: &AstNode) -> String {
        self.identifier_text(node.token().unwrap_or(""))
    }

    fn identifier_text(&self, name: &str) -> String {
        if is_plain_identifier(name) {
            return name.to_string();
        }
        match self.dialect.identifier_quote {
            IdentifierQuote::Brackets => format!("[{}]", name.replace(']', "]]")),
            IdentifierQuote::Backticks => format!("`{}`", name.replace('`', "``")),
            IdentifierQuote::DoubleQuotes => format!("\"{}\"", name.replace('"', "\"\"")),
        }
    }

    fn operand(&self, child: &AstNode, parent_prec: u8, right: bool) -> Result<String, PrintError> {
        let p = precedence(child);
        let text = self.expr(child)?;
        let wrap = p < parent_prec || (right && p == parent_prec) || (parent_prec == 1 && p == 1);
        Ok(if wrap { format!("({text})") } else { text })
    }

    fn expr(&self, node: &AstNode) -> Result<String, PrintError> {
        match node.kind {
            NodeKind::Identifier => Ok(self.identifier(node)),
            NodeKind::StringLit => {
                let q = self.dialect.preferred_string_quote();
                let body = node.token().unwrap_or("").replace(q, &format!("{q}{q}"));
                Ok(format!("{q}{body}{q}"))
            }
            NodeKind::NumberLit | NodeKind::BoolLit | NodeKind::TypeName => {
                Ok(node.token().unwrap_or("").to_string())
            }
            NodeKind::NullLit => Ok("NULL".to_string()),
            NodeKind::Alias => Ok(format!(
                "{} AS {}",
                self.expr(&node.children[0])?,
                self.identifier(&node.children[1])
            )),
            NodeKind::BinaryOp => {
                let op = node.token().unwrap_or("");
                if op == "+"
                    && self.dialect.string_concat == StringConcat::ConcatFunction
                    && node
                        .children
                        .iter()
                        .any(|c| is_evident_string(c, self.dialect))
                {
                    return Err(self.unprintable(node, "`+` string concatenation"));
                }
                let prec = precedence(node);
                let l = self.operand(&node.children[0], prec, false)?;
                let r = self.operand(&node.children[1], prec, true)?;
                if op == "." {
                    Ok(format!("{l}.{r}"))
                } else {
                    Ok(format!("{l} {op} {r}"))
                }
            }
            NodeKind::FunctionCall => {
                let name = node.token().unwrap_or("");
                let Some((_, spec)) = self.dialect.function_by_name(name) else {
                    return Err(self.unprintable(node, format!("unknown function {name}")));
                };
                if !spec.arity.accepts(node.children.len()) {
                    return Err(self.unprintable(
                        node,
                        format!(
                            "{name} takes {} argument(s), got {}",
                            spec.arity,
                            node.children.len()
                        ),
                    ));
                }
                if spec.type_arg
                    && node
                        .children
                        .first()
                        .is_some_and(|c| c.kind != NodeKind::TypeName)
                {
                    return Err(self.unprintable(node, format!("{name} expects a type first")));
                }
                let args: Result<Vec<_>, _> = node.children.iter().map(|c| self.expr(c)).collect();
                Ok(format!("{}({})", spec.name, args?.join(", ")))
            }
            NodeKind::CaseExpr => {
                let has_else = node.token() == Some("ELSE");
                let n = node.children.len();
                let branches = if has_else { n - 1 } else { n };
                let mut out = String::from("CASE");
                for pair in node.children[..branches].chunks(2) {
                    out.push_str(&format!(
                        " WHEN {} THEN {}",
                        self.expr(&pair[0])?,
                        self.expr(&pair[1])?
                    ));
                }
                if has_else {
                    out.push_str(&format!(" ELSE {}", self.expr(&node.children[n - 1])?));
                }
                out.push_str(" END");
                Ok(out)
            }
            NodeKind::CastExpr => Ok(format!(
                "CAST({} AS {})",
                self.expr(&node.children[0])?,
                node.children[1].token().unwrap_or("")
            )),
            NodeKind::Script
            | NodeKind::DeclareStmt
            | NodeKind::SelectStmt
            | NodeKind::LimitClause => {
                Err(self.unprintable(node, "statement in expression position"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::structural_equal;
    use crate::parser::parse;

    fn roundtrip(text: &str, d: &DialectProfile) -> String {
        let ast = parse(text, d).unwrap();
        let out = print(&ast, d).unwrap();
        assert!(structural_equal(&ast, &parse(&out, d).unwrap()), "{out}");
        out
    }

    #[test]
    fn declare_prints_default_under_tgt() {
        let ast = parse(
            "DECLARE var1 VARCHAR(20) DEFAULT NULL",
            DialectProfile::tgt(),
        )
        .unwrap();
        assert_eq!(
            print(&ast, DialectProfile::tgt()).unwrap(),
            "DECLARE var1 VARCHAR(20) DEFAULT NULL"
        );
        // SRC-shaped declaration cannot be printed as TGT without conversion.
        let src = parse("DECLARE var1 VARCHAR(20) = NULL", DialectProfile::src()).unwrap();
        assert!(print(&src, DialectProfile::tgt()).is_err());
    }

    #[test]
    fn select_one_in_both_dialects() {
        assert_eq!(roundtrip("SELECT 1", DialectProfile::src()), "SELECT 1");
        assert_eq!(roundtrip("SELECT 1", DialectProfile::tgt()), "SELECT 1");
    }

    #[test]
    fn plus_concat_is_unprintable_in_tgt() {
        let ast = parse("SELECT a + \"x\"", DialectProfile::src()).unwrap();
        let err = print(&ast.children[0].children[0], DialectProfile::tgt()).unwrap_err();
        assert!(matches!(
            err,
            PrintError::UnprintableNode {
                kind: NodeKind::BinaryOp,
                ..
            }
        ));
    }

    #[test]
    fn canonical_formatting() {
        assert_eq!(
            roundtrip(
                "select   top 3 [first name] ,(a+b)*c as x from [t]",
                DialectProfile::src()
            ),
            "SELECT TOP 3 [first name], (a + b) * c AS x FROM t"
        );
        assert_eq!(
            roundtrip(
                "SELECT a - (b - c), (a + \"x\") + \"y\", 'it''s'",
                DialectProfile::src()
            ),
            "SELECT a - (b - c), a + \"x\" + \"y\", \"it's\""
        );
        assert_eq!(
            roundtrip("SELECT `first name` FROM t LIMIT n", DialectProfile::tgt()),
            "SELECT `first name` FROM t LIMIT n"
        );
        assert_eq!(
            roundtrip(
                "SELECT TOP (n) CAST(a AS DECIMAL(10, 2)), CASE WHEN a = 1 THEN b END",
                DialectProfile::src()
            ),
            "SELECT TOP (n) CAST(a AS DECIMAL(10,2)), CASE WHEN a = 1 THEN b END"
        );
    }

    #[test]
    fn functions_outside_the_catalog_are_unprintable() {
        let ast = parse("SELECT GETDATE()", DialectProfile::src()).unwrap();
        assert!(print(&ast, DialectProfile::tgt()).is_err());
    }
}
