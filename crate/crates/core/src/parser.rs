//! Recursive-descent parser for the supported SQL subset.
//!
//! Grammar (both dialects; variant points come from the profile):
//!
//! ```text
//! script     := (stmt [';'])*
//! stmt       := declare | select
//! declare    := DECLARE name type [NOT NULL] [('=' | DEFAULT) expr]
//! select     := SELECT [TOP (NUMBER | '(' expr ')')] item (',' item)*
//!               [FROM name] [LIMIT (NUMBER | name)]
//! item       := expr [AS name]
//! expr       := additive [cmp additive]
//! additive   := mult (('+' | '-' | '||') mult)*
//! mult       := unary (('*' | '/') unary)*
//! unary      := '-' NUMBER | primary
//! primary    := NUMBER | STRING | NULL | TRUE | FALSE | case | cast
//!             | name '(' args ')' | name ('.' name)* | '(' expr ')'
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{AstNode, NodeKind, Span};
use crate::dialect::{DialectProfile, RowLimit, StringConcat, TypeClass};
use crate::lexer::{tokenize, Tok, Token};

pub const KEYWORDS: [&str; 17] = [
    "SELECT", "FROM", "AS", "DECLARE", "DEFAULT", "NULL", "TRUE", "FALSE", "CASE", "WHEN", "THEN",
    "ELSE", "END", "CAST", "TOP", "LIMIT", "NOT",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub struct ParseError {
    pub span: Span,
    pub found: String,
    pub expected: Vec<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, byte {}: {}",
            self.span.line, self.span.byte_start, self.message
        )?;
        if !self.found.is_empty() {
            write!(f, " (found `{}`)", self.found)?;
        }
        if !self.expected.is_empty() {
            write!(f, "; expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// Parses `text` under `dialect` into a `Script` node.
pub fn parse(text: &str, dialect: &DialectProfile) -> Result<AstNode, ParseError> {
    let tokens = tokenize(text, dialect)?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        dialect,
    };
    p.script(text.len())
}

/// True when a node is syntactically a string without any type information.
pub fn is_evident_string(node: &AstNode, dialect: &DialectProfile) -> bool {
    match node.kind {
        NodeKind::StringLit => true,
        NodeKind::BinaryOp => node.token() == Some("||"),
        NodeKind::FunctionCall => node
            .token()
            .and_then(|name| dialect.function_by_name(name))
            .is_some_and(|(_, f)| f.returns == Some(TypeClass::String)),
        _ => false,
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    dialect: &'a DialectProfile,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            span: t.span,
            found: t.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: message.to_string(),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().tok.is_keyword(kw)
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(s) if s == sym)
    }

    fn eat_keyword(&mut self, kw: &str) -> Option<Span> {
        if self.at_keyword(kw) {
            Some(self.bump().span)
        } else {
            None
        }
    }

    fn eat_sym(&mut self, sym: &str) -> Option<Span> {
        if self.at_sym(sym) {
            Some(self.bump().span)
        } else {
            None
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Span, ParseError> {
        self.eat_keyword(kw)
            .ok_or_else(|| self.error(&format!("expected {kw}"), &[kw]))
    }

    fn expect_sym(&mut self, sym: &str) -> Result<Span, ParseError> {
        self.eat_sym(sym)
            .ok_or_else(|| self.error(&format!("expected `{sym}`"), &[sym]))
    }

    fn script(&mut self, len: usize) -> Result<AstNode, ParseError> {
        let mut stmts = Vec::new();
        while self.eat_sym(";").is_some() {}
        if self.peek().tok == Tok::Eof {
            return Err(self.error("empty input", &["DECLARE", "SELECT"]));
        }
        while self.peek().tok != Tok::Eof {
            let (stmt, continuations) = if self.at_keyword("DECLARE") {
                self.declare()?
            } else if self.at_keyword("SELECT") {
                self.select()?
            } else {
                return Err(self.error("expected a statement", &["DECLARE", "SELECT"]));
            };
            stmts.push(stmt);
            let at_end = self.at_sym(";")
                || self.peek().tok == Tok::Eof
                || self.at_keyword("DECLARE")
                || self.at_keyword("SELECT");
            if !at_end {
                let mut expected: Vec<&str> = continuations;
                expected.extend([";", "DECLARE", "SELECT", "end of input"]);
                return Err(self.error("unexpected token after statement", &expected));
            }
            while self.eat_sym(";").is_some() {}
        }
        Ok(AstNode::new(
            NodeKind::Script,
            None,
            stmts,
            Span::new(0, len, 1),
        ))
    }

    fn name(&mut self) -> Result<AstNode, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Word(w) if !is_keyword(&w) => {
                self.bump();
                Ok(AstNode::leaf(NodeKind::Identifier, w, t.span))
            }
            Tok::QuotedIdent(w) => {
                self.bump();
                Ok(AstNode::leaf(NodeKind::Identifier, w, t.span))
            }
            _ => Err(self.error("expected an identifier", &["identifier"])),
        }
    }

    fn type_name(&mut self, allow_not_null: bool) -> Result<AstNode, ParseError> {
        let t = self.peek().clone();
        let base = match &t.tok {
            Tok::Word(w) if !is_keyword(w) => w.to_ascii_uppercase(),
            _ => return Err(self.error("expected a type name", &["type name"])),
        };
        self.bump();
        let mut text = base;
        let mut span = t.span;
        if self.eat_sym("(").is_some() {
            let mut params = Vec::new();
            loop {
                let p = self.peek().clone();
                match p.tok {
                    Tok::Number(n) => params.push(n),
                    Tok::Word(w) if w.eq_ignore_ascii_case("MAX") => params.push("MAX".into()),
                    _ => return Err(self.error("expected a type parameter", &["number", "MAX"])),
                }
                self.bump();
                if self.eat_sym(",").is_none() {
                    break;
                }
            }
            span = span.join(self.expect_sym(")")?);
            text = format!("{text}({})", params.join(","));
        }
        if allow_not_null && self.at_keyword("NOT") {
            self.bump();
            span = span.join(self.expect_keyword("NULL")?);
            text.push_str(" NOT NULL");
        }
        Ok(AstNode::leaf(NodeKind::TypeName, text, span))
    }

    fn declare(&mut self) -> Result<(AstNode, Vec<&'static str>), ParseError> {
        let start = self.expect_keyword("DECLARE")?;
        let name = self.name()?;
        let ty = self.type_name(true)?;
        let mut span = start.join(ty.span);
        let init_token = self.dialect.declare_initializer.token();
        let has_init = if init_token == "=" {
            self.eat_sym("=").is_some()
        } else {
            self.eat_keyword(init_token).is_some()
        };
        let mut children = vec![name, ty];
        let mut token = None;
        let mut continuations = Vec::new();
        if has_init {
            let init = self.expr()?;
            span = span.join(init.span);
            children.push(init);
            token = Some(init_token.to_string());
        } else {
            if !children[1].token().unwrap_or("").ends_with("NOT NULL") {
                continuations.push("NOT");
            }
            continuations.push(if init_token == "=" { "=" } else { "DEFAULT" });
        }
        Ok((
            AstNode::new(NodeKind::DeclareStmt, token, children, span),
            continuations,
        ))
    }

    fn select(&mut self) -> Result<(AstNode, Vec<&'static str>), ParseError> {
        let mut span = self.expect_keyword("SELECT")?;
        let mut limit = None;
        if self.dialect.row_limit == RowLimit::TopPrefix {
            if let Some(top) = self.eat_keyword("TOP") {
                let count = if self.eat_sym("(").is_some() {
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    e
                } else {
                    match self.peek().tok.clone() {
                        Tok::Number(n) => {
                            let t = self.bump();
                            AstNode::leaf(NodeKind::NumberLit, n, t.span)
                        }
                        _ => return Err(self.error("expected a row count", &["number", "("])),
                    }
                };
                let end = self.toks[self.pos - 1].span;
                limit = Some(AstNode::new(
                    NodeKind::LimitClause,
                    Some("TOP".into()),
                    vec![count],
                    top.join(end),
                ));
            }
        }
        let mut items = vec![self.select_item()?];
        while self.eat_sym(",").is_some() {
            items.push(self.select_item()?);
        }
        span = span.join(items.last().unwrap().span);
        let mut table = None;
        let mut continuations = vec![",", "AS"];
        if let Some(from) = self.eat_keyword("FROM") {
            let t = self.name()?;
            span = span.join(from).join(t.span);
            table = t.token;
        } else {
            continuations.push("FROM");
        }
        if self.dialect.row_limit == RowLimit::LimitSuffix {
            if let Some(kw) = self.eat_keyword("LIMIT") {
                let t = self.peek().clone();
                let count = match t.tok {
                    Tok::Number(n) => {
                        self.bump();
                        AstNode::leaf(NodeKind::NumberLit, n, t.span)
                    }
                    Tok::Word(_) | Tok::QuotedIdent(_) => self.name()?,
                    _ => return Err(self.error("expected a row count", &["number", "identifier"])),
                };
                let lspan = kw.join(count.span);
                span = span.join(lspan);
                limit = Some(AstNode::new(
                    NodeKind::LimitClause,
                    Some("LIMIT".into()),
                    vec![count],
                    lspan,
                ));
            } else {
                continuations.push("LIMIT");
            }
        }
        if let Some(l) = limit {
            span = span.join(l.span);
            items.push(l);
        }
        Ok((
            AstNode::new(NodeKind::SelectStmt, table, items, span),
            continuations,
        ))
    }

    fn select_item(&mut self) -> Result<AstNode, ParseError> {
        let e = self.expr()?;
        if self.eat_keyword("AS").is_some() {
            let alias = self.name()?;
            let span = e.span.join(alias.span);
            return Ok(AstNode::new(NodeKind::Alias, None, vec![e, alias], span));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<AstNode, ParseError> {
        let left = self.additive()?;
        let op = match self.peek().tok {
            Tok::Sym(s @ ("=" | "<>" | "!=" | "<" | ">" | "<=" | ">=")) => s,
            _ => return Ok(left),
        };
        self.bump();
        let right = self.additive()?;
        Ok(binary(op, left, right))
    }

    fn additive(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym(s @ ("+" | "-" | "||")) => s,
                _ => return Ok(left),
            };
            let op_tok = self.bump();
            let right = self.multiplicative()?;
            if op == "+"
                && self.dialect.string_concat == StringConcat::ConcatFunction
                && (is_evident_string(&left, self.dialect)
                    || is_evident_string(&right, self.dialect))
            {
                let concat = self
                    .dialect
                    .function("concat")
                    .map_or("CONCAT", |f| f.name.as_str());
                return Err(ParseError {
                    span: op_tok.span,
                    found: "+".into(),
                    expected: vec![concat.to_string()],
                    message: format!("`+` does not concatenate strings in {}", self.dialect.name),
                });
            }
            left = binary(op, left, right);
        }
    }

    fn multiplicative(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym(s @ ("*" | "/")) => s,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.unary()?;
            left = binary(op, left, right);
        }
    }

    fn unary(&mut self) -> Result<AstNode, ParseError> {
        if self.at_sym("-") {
            if let Tok::Number(n) = self.peek_at(1).clone() {
                let minus = self.bump().span;
                let num = self.bump().span;
                return Ok(AstNode::leaf(
                    NodeKind::NumberLit,
                    format!("-{n}"),
                    minus.join(num),
                ));
            }
            self.bump();
            return Err(self.error("expected a number after unary minus", &["number"]));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<AstNode, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(n) => {
                self.bump();
                Ok(AstNode::leaf(NodeKind::NumberLit, n.clone(), t.span))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(AstNode::leaf(NodeKind::StringLit, s.clone(), t.span))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("NULL") => {
                self.bump();
                Ok(AstNode::new(NodeKind::NullLit, None, vec![], t.span))
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("TRUE") || w.eq_ignore_ascii_case("FALSE") => {
                self.bump();
                Ok(AstNode::leaf(
                    NodeKind::BoolLit,
                    w.to_ascii_uppercase(),
                    t.span,
                ))
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("CASE") => self.case_expr(),
            Tok::Word(w) if w.eq_ignore_ascii_case("CAST") => self.cast_expr(),
            Tok::Word(w) if !is_keyword(w) && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.function_call()
            }
            Tok::Word(_) | Tok::QuotedIdent(_) => {
                let mut node = self.name()?;
                while self.at_sym(".") {
                    self.bump();
                    let right = self.name()?;
                    node = binary(".", node, right);
                }
                Ok(node)
            }
            _ => Err(self.error(
                "expected an expression",
                &[
                    "number",
                    "string",
                    "identifier",
                    "NULL",
                    "CASE",
                    "CAST",
                    "(",
                ],
            )),
        }
    }

    fn function_call(&mut self) -> Result<AstNode, ParseError> {
        let name_tok = self.peek().clone();
        let name = match &name_tok.tok {
            Tok::Word(w) => w.to_ascii_uppercase(),
            _ => unreachable!("caller checked for a word"),
        };
        let Some((_, spec)) = self.dialect.function_by_name(&name) else {
            return Err(ParseError {
                span: name_tok.span,
                found: name.clone(),
                expected: Vec::new(),
                message: format!("unknown function {name} in {}", self.dialect.name),
            });
        };
        let spec = spec.clone();
        self.bump();
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.at_sym(")") {
            if spec.type_arg {
                args.push(self.type_name(false)?);
                if !self.at_sym(")") {
                    self.expect_sym(",")?;
                    args.push(self.expr()?);
                }
            } else {
                args.push(self.expr()?);
            }
            while self.eat_sym(",").is_some() {
                args.push(self.expr()?);
            }
        }
        let close = self.expect_sym(")")?;
        if !spec.arity.accepts(args.len()) {
            return Err(ParseError {
                span: name_tok.span.join(close),
                found: format!("{} argument(s)", args.len()),
                expected: vec![format!("{} argument(s)", spec.arity)],
                message: format!("wrong number of arguments to {name}"),
            });
        }
        Ok(AstNode::new(
            NodeKind::FunctionCall,
            Some(spec.name.clone()),
            args,
            name_tok.span.join(close),
        ))
    }

    fn case_expr(&mut self) -> Result<AstNode, ParseError> {
        let start = self.expect_keyword("CASE")?;
        let mut children = Vec::new();
        if !self.at_keyword("WHEN") {
            return Err(self.error("expected WHEN", &["WHEN"]));
        }
        while self.eat_keyword("WHEN").is_some() {
            children.push(self.expr()?);
            self.expect_keyword("THEN")?;
            children.push(self.expr()?);
        }
        let mut token = None;
        if self.eat_keyword("ELSE").is_some() {
            children.push(self.expr()?);
            token = Some("ELSE".to_string());
        }
        if !self.at_keyword("END") {
            let expected: &[&str] = if token.is_some() {
                &["END"]
            } else {
                &["WHEN", "ELSE", "END"]
            };
            return Err(self.error("unterminated CASE", expected));
        }
        let end = self.bump().span;
        Ok(AstNode::new(
            NodeKind::CaseExpr,
            token,
            children,
            start.join(end),
        ))
    }

    fn cast_expr(&mut self) -> Result<AstNode, ParseError> {
        let start = self.expect_keyword("CAST")?;
        self.expect_sym("(")?;
        let e = self.expr()?;
        self.expect_keyword("AS")?;
        let ty = self.type_name(false)?;
        let end = self.expect_sym(")")?;
        Ok(AstNode::new(
            NodeKind::CastExpr,
            None,
            vec![e, ty],
            start.join(end),
        ))
    }
}

fn binary(op: &str, left: AstNode, right: AstNode) -> AstNode {
    let span = left.span.join(right.span);
    AstNode::new(
        NodeKind::BinaryOp,
        Some(op.to_string()),
        vec![left, right],
        span,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{spans_nested, validate};

    fn src(text: &str) -> AstNode {
        parse(text, DialectProfile::src()).unwrap()
    }

    #[test]
    fn declare_with_equals_under_src() {
        let ast = src("DECLARE var1 VARCHAR(20) = NULL");
        assert_eq!(
            ast.sexpr(),
            "Script(DeclareStmt[=](Identifier[var1], TypeName[VARCHAR(20)], NullLit))"
        );
    }

    #[test]
    fn minimal_select() {
        assert_eq!(src("SELECT 1").sexpr(), "Script(SelectStmt(NumberLit[1]))");
    }

    #[test]
    fn declare_with_equals_fails_under_tgt_at_equals_sign() {
        let err = parse("DECLARE var1 VARCHAR(20) = NULL", DialectProfile::tgt()).unwrap_err();
        assert_eq!(err.span.byte_start, 25);
        assert_eq!(err.found, "=");
        assert!(err.expected.contains(&"DEFAULT".to_string()));
    }

    #[test]
    fn two_statement_example_spans_two_lines() {
        let ast = src("DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\"\nAS var2");
        assert_eq!(ast.children.len(), 2);
        assert_eq!(
            ast.children[1].sexpr(),
            "SelectStmt(Alias(BinaryOp[+](Identifier[var1], StringLit[string]), Identifier[var2]))"
        );
        assert_eq!(ast.children[1].span.line, 2);
        assert!(validate(&ast).is_ok());
        assert!(spans_nested(&ast));
    }

    #[test]
    fn precedence_and_associativity() {
        let ast = src("SELECT a - b - c * d");
        assert_eq!(
            ast.children[0].children[0].sexpr(),
            "BinaryOp[-](BinaryOp[-](Identifier[a], Identifier[b]), BinaryOp[*](Identifier[c], Identifier[d]))"
        );
    }

    #[test]
    fn top_is_stored_as_trailing_limit_clause() {
        let ast = src("SELECT TOP 5 name FROM [users]");
        let sel = &ast.children[0];
        assert_eq!(sel.token(), Some("users"));
        assert_eq!(sel.children[1].sexpr(), "LimitClause[TOP](NumberLit[5])");
        assert!(spans_nested(&ast));
        assert!(parse("SELECT TOP 5 name", DialectProfile::tgt()).is_err());
        assert!(parse("SELECT name LIMIT 5", DialectProfile::tgt()).is_ok());
    }

    #[test]
    fn functions_are_checked_against_the_catalog() {
        assert!(parse("SELECT GETDATE()", DialectProfile::src()).is_ok());
        assert!(parse("SELECT GETDATE()", DialectProfile::tgt()).is_err());
        assert!(parse("SELECT LEN(a, b)", DialectProfile::src()).is_err());
        let conv = src("SELECT CONVERT(VARCHAR(10), qty)");
        assert_eq!(
            conv.children[0].children[0].sexpr(),
            "FunctionCall[CONVERT](TypeName[VARCHAR(10)], Identifier[qty])"
        );
    }

    #[test]
    fn plus_on_strings_is_rejected_in_tgt() {
        let err = parse("SELECT var1 + \"string\"", DialectProfile::tgt()).unwrap_err();
        assert_eq!(err.found, "+");
        assert!(parse("SELECT a + 1", DialectProfile::tgt()).is_ok());
    }

    #[test]
    fn qualified_names_case_and_cast() {
        let ast =
            src("SELECT [dbo].[x], CASE WHEN a > 1 THEN \"y\" ELSE \"n\" END, CAST(a AS INT)");
        let items = &ast.children[0].children;
        assert_eq!(
            items[0].sexpr(),
            "BinaryOp[.](Identifier[dbo], Identifier[x])"
        );
        assert_eq!(items[1].kind, NodeKind::CaseExpr);
        assert_eq!(items[1].token(), Some("ELSE"));
        assert_eq!(items[2].sexpr(), "CastExpr(Identifier[a], TypeName[INT])");
    }

    #[test]
    fn errors_carry_expected_sets() {
        let e = parse("UPDATE t", DialectProfile::src()).unwrap_err();
        assert_eq!(e.expected, vec!["DECLARE", "SELECT"]);
        assert!(parse("", DialectProfile::src()).is_err());
        assert!(parse("SELECT 1 +", DialectProfile::src()).is_err());
    }
}
