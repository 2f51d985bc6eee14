//! Dialect-neutral syntax trees.
//!
//! Every node carries a [`NodeKind`], an ordered list of children, an optional
//! token (operator symbol, function name, literal text, type name) and the
//! byte span it was parsed from. Trees are plain values: cloning is cheap
//! enough for segment-sized inputs and nothing is shared mutably.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Script,
    DeclareStmt,
    SelectStmt,
    Alias,
    BinaryOp,
    FunctionCall,
    Identifier,
    StringLit,
    NumberLit,
    NullLit,
    BoolLit,
    CaseExpr,
    CastExpr,
    TypeName,
    LimitClause,
}

impl NodeKind {
    pub const ALL: [NodeKind; 15] = [
        NodeKind::Script,
        NodeKind::DeclareStmt,
        NodeKind::SelectStmt,
        NodeKind::Alias,
        NodeKind::BinaryOp,
        NodeKind::FunctionCall,
        NodeKind::Identifier,
        NodeKind::StringLit,
        NodeKind::NumberLit,
        NodeKind::NullLit,
        NodeKind::BoolLit,
        NodeKind::CaseExpr,
        NodeKind::CastExpr,
        NodeKind::TypeName,
        NodeKind::LimitClause,
    ];

    pub fn is_leaf(self) -> bool {
        matches!(
            self,
            NodeKind::Identifier
                | NodeKind::StringLit
                | NodeKind::NumberLit
                | NodeKind::NullLit
                | NodeKind::BoolLit
                | NodeKind::TypeName
        )
    }

    pub fn is_statement(self) -> bool {
        matches!(self, NodeKind::DeclareStmt | NodeKind::SelectStmt)
    }

    pub fn from_name(name: &str) -> Option<NodeKind> {
        NodeKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Script => "Script",
            NodeKind::DeclareStmt => "DeclareStmt",
            NodeKind::SelectStmt => "SelectStmt",
            NodeKind::Alias => "Alias",
            NodeKind::BinaryOp => "BinaryOp",
            NodeKind::FunctionCall => "FunctionCall",
            NodeKind::Identifier => "Identifier",
            NodeKind::StringLit => "StringLit",
            NodeKind::NumberLit => "NumberLit",
            NodeKind::NullLit => "NullLit",
            NodeKind::BoolLit => "BoolLit",
            NodeKind::CaseExpr => "CaseExpr",
            NodeKind::CastExpr => "CastExpr",
            NodeKind::TypeName => "TypeName",
            NodeKind::LimitClause => "LimitClause",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub byte_start: usize,
    pub byte_end: usize,
    /// 1-based line of `byte_start`.
    pub line: usize,
}

impl Span {
    pub fn new(byte_start: usize, byte_end: usize, line: usize) -> Self {
        debug_assert!(byte_start <= byte_end);
        Span {
            byte_start,
            byte_end,
            line,
        }
    }

    /// Smallest span covering both.
    pub fn join(self, other: Span) -> Span {
        if other.byte_start < self.byte_start {
            Span::new(
                other.byte_start,
                self.byte_end.max(other.byte_end),
                other.line,
            )
        } else {
            Span::new(
                self.byte_start,
                self.byte_end.max(other.byte_end),
                self.line,
            )
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.byte_start <= other.byte_start && other.byte_end <= self.byte_end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        text.get(self.byte_start..self.byte_end).unwrap_or("")
    }
}

/// A child-index sequence from some root.
pub type Path = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
    #[serde(default)]
    pub span: Span,
}

impl AstNode {
    pub fn new(kind: NodeKind, token: Option<String>, children: Vec<AstNode>, span: Span) -> Self {
        AstNode {
            kind,
            children,
            token,
            span,
        }
    }

    pub fn leaf(kind: NodeKind, token: impl Into<String>, span: Span) -> Self {
        AstNode::new(kind, Some(token.into()), Vec::new(), span)
    }

    pub fn token(&self) -> Option<&str> {
        self.token.as_deref()
    }

    pub fn is(&self, kind: NodeKind, token: &str) -> bool {
        self.kind == kind && self.token().is_some_and(|t| t.eq_ignore_ascii_case(token))
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    pub fn get(&self, path: &[usize]) -> Option<&AstNode> {
        path.iter().try_fold(self, |node, &i| node.children.get(i))
    }

    pub fn get_mut(&mut self, path: &[usize]) -> Option<&mut AstNode> {
        path.iter()
            .try_fold(self, |node, &i| node.children.get_mut(i))
    }

    /// Pre-order walk yielding each node with its path.
    pub fn walk(&self) -> Vec<(Path, &AstNode)> {
        fn go<'a>(node: &'a AstNode, path: &mut Path, out: &mut Vec<(Path, &'a AstNode)>) {
            out.push((path.clone(), node));
            for (i, child) in node.children.iter().enumerate() {
                path.push(i);
                go(child, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Sets every span in the tree to `span`.
    pub fn with_span(mut self, span: Span) -> Self {
        fn go(node: &mut AstNode, span: Span) {
            node.span = span;
            node.children.iter_mut().for_each(|c| go(c, span));
        }
        go(&mut self, span);
        self
    }

    /// Structural equality ignoring spans.
    pub fn structural_eq(&self, other: &AstNode) -> bool {
        structural_equal(self, other)
    }

    /// Compact s-expression rendering, used in messages and debugging output.
    pub fn sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    fn write_sexpr(&self, out: &mut String) {
        out.push_str(self.kind.name());
        if let Some(t) = &self.token {
            out.push('[');
            out.push_str(t);
            out.push(']');
        }
        if !self.children.is_empty() {
            out.push('(');
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                c.write_sexpr(out);
            }
            out.push(')');
        }
    }
}

/// True iff kinds, tokens and child lists match recursively; spans are ignored.
pub fn structural_equal(a: &AstNode, b: &AstNode) -> bool {
    a.kind == b.kind
        && a.token == b.token
        && a.children.len() == b.children.len()
        && a.children
            .iter()
            .zip(&b.children)
            .all(|(x, y)| structural_equal(x, y))
}

/// Describes the first violated tree invariant, if any.
pub fn validate(node: &AstNode) -> Result<(), String> {
    let n = node.children.len();
    let bad = |why: &str| Err(format!("{}: {}", node.sexpr(), why));
    if node.kind.is_leaf() && n != 0 {
        return bad("leaf node with children");
    }
    match node.kind {
        NodeKind::Script => {
            if !node.children.iter().all(|c| c.kind.is_statement()) {
                return bad("script children must be statements");
            }
        }
        NodeKind::DeclareStmt => {
            if !(n == 2 || n == 3) {
                return bad("declaration needs name, type and optional initializer");
            }
            if node.children[0].kind != NodeKind::Identifier
                || node.children[1].kind != NodeKind::TypeName
            {
                return bad("declaration must start with identifier and type");
            }
            if (n == 3) != node.token.is_some() {
                return bad("initializer token must accompany an initializer");
            }
        }
        NodeKind::SelectStmt => {
            if n == 0 {
                return bad("select without items");
            }
            for (i, c) in node.children.iter().enumerate() {
                if c.kind == NodeKind::LimitClause && i + 1 != n {
                    return bad("row limit must be the last select child");
                }
                if c.kind.is_statement()
                    || c.kind == NodeKind::Script
                    || c.kind == NodeKind::TypeName
                {
                    return bad("invalid select item");
                }
            }
            if n == 1 && node.children[0].kind == NodeKind::LimitClause {
                return bad("select without items");
            }
        }
        NodeKind::Alias => {
            if n != 2 || node.children[1].kind != NodeKind::Identifier {
                return bad("alias needs expression and identifier");
            }
        }
        NodeKind::BinaryOp => {
            if n != 2 || node.token.is_none() {
                return bad("binary operator needs two operands and a symbol");
            }
        }
        NodeKind::FunctionCall => {
            if node.token.is_none() {
                return bad("function call without name");
            }
        }
        NodeKind::CaseExpr => {
            let has_else = node.token.as_deref() == Some("ELSE");
            let branches = if has_else { n.saturating_sub(1) } else { n };
            if branches < 2 || branches % 2 != 0 || (has_else && n < 3) {
                return bad("malformed CASE branches");
            }
        }
        NodeKind::CastExpr => {
            if n != 2 || node.children[1].kind != NodeKind::TypeName {
                return bad("cast needs expression and type");
            }
        }
        NodeKind::LimitClause => {
            if n != 1 || node.token.is_none() {
                return bad("row limit needs one count");
            }
        }
        NodeKind::NullLit => {}
        _ => {
            if node.token.is_none() {
                return bad("leaf without token");
            }
        }
    }
    node.children.iter().try_for_each(validate)
}

/// Checks that every child span nests inside its parent span.
pub fn spans_nested(node: &AstNode) -> bool {
    node.children
        .iter()
        .all(|c| node.span.contains(&c.span) && spans_nested(c))
}

/// One unit of conversion: a statement plus the declarations that precede it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SqlSegment {
    pub segment_id: String,
    pub dialect: String,
    pub text: String,
    pub ast: AstNode,
}

impl SqlSegment {
    /// Parses `text` as a single segment.
    pub fn parse(
        segment_id: &str,
        text: &str,
        dialect: &crate::dialect::DialectProfile,
    ) -> Result<SqlSegment, crate::parser::ParseError> {
        Ok(SqlSegment {
            segment_id: segment_id.to_string(),
            dialect: dialect.name.clone(),
            text: text.to_string(),
            ast: crate::parser::parse(text, dialect)?,
        })
    }

    /// Splits a parsed script into segments: a run of declarations attaches to
    /// the statement that follows it. Segment text is the source slice from the
    /// first to the last statement; spans are rebased onto that slice.
    pub fn split_script(
        file_id: &str,
        dialect: &str,
        text: &str,
        script: &AstNode,
    ) -> Vec<SqlSegment> {
        let mut groups: Vec<Vec<&AstNode>> = Vec::new();
        let mut pending: Vec<&AstNode> = Vec::new();
        for stmt in &script.children {
            pending.push(stmt);
            if stmt.kind != NodeKind::DeclareStmt {
                groups.push(std::mem::take(&mut pending));
            }
        }
        if !pending.is_empty() {
            groups.push(pending);
        }
        groups
            .into_iter()
            .enumerate()
            .map(|(ordinal, stmts)| {
                let start = stmts[0].span.byte_start;
                let end = stmts.last().unwrap().span.byte_end;
                let line0 = stmts[0].span.line;
                let children: Vec<AstNode> = stmts
                    .into_iter()
                    .map(|s| rebase(s.clone(), start, line0 - 1))
                    .collect();
                let seg_text = text[start..end].to_string();
                let span = Span::new(0, seg_text.len(), 1);
                SqlSegment {
                    segment_id: format!("{file_id}#{ordinal}"),
                    dialect: dialect.to_string(),
                    text: seg_text,
                    ast: AstNode::new(NodeKind::Script, None, children, span),
                }
            })
            .collect()
    }
}

fn rebase(mut node: AstNode, byte_offset: usize, line_offset: usize) -> AstNode {
    node.span = Span::new(
        node.span.byte_start - byte_offset,
        node.span.byte_end - byte_offset,
        node.span.line - line_offset,
    );
    node.children = node
        .children
        .into_iter()
        .map(|c| rebase(c, byte_offset, line_offset))
        .collect();
    node
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(t: &str, s: usize) -> AstNode {
        AstNode::leaf(NodeKind::NumberLit, t, Span::new(s, s + t.len(), 1))
    }

    #[test]
    fn structural_equality_ignores_spans() {
        let a = num("1", 0);
        let b = num("1", 7);
        assert!(structural_equal(&a, &a));
        assert!(structural_equal(&a, &b));
        assert!(!structural_equal(&a, &num("2", 0)));
    }

    #[test]
    fn validator_rejects_malformed_binary_op() {
        let op = AstNode::new(
            NodeKind::BinaryOp,
            Some("+".into()),
            vec![num("1", 0)],
            Span::default(),
        );
        assert!(validate(&op).is_err());
        let ok = AstNode::new(
            NodeKind::BinaryOp,
            Some("+".into()),
            vec![num("1", 0), num("2", 4)],
            Span::new(0, 5, 1),
        );
        assert!(validate(&ok).is_ok());
        assert!(spans_nested(&ok));
    }

    #[test]
    fn paths_address_children() {
        let op = AstNode::new(
            NodeKind::BinaryOp,
            Some("+".into()),
            vec![num("1", 0), num("2", 4)],
            Span::new(0, 5, 1),
        );
        assert_eq!(op.get(&[1]).unwrap().token(), Some("2"));
        assert!(op.get(&[2]).is_none());
        assert_eq!(op.walk().len(), 3);
        assert_eq!(op.sexpr(), "BinaryOp[+](NumberLit[1], NumberLit[2])");
    }
}
