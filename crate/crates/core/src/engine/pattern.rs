use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ast::{structural_equal, AstNode, NodeKind, Path, Span};
use crate::dialect::{DialectPair, TypeClass};
use crate::types::Scope;

/// Left- or right-hand side of a rule: concrete nodes with typed holes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternNode {
    Hole {
        hole: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kinds: Option<Vec<NodeKind>>,
    },
    Node {
        kind: NodeKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        token: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        children: Vec<PatternNode>,
    },
}

impl PatternNode {
    pub fn hole(name: &str) -> Self {
        PatternNode::Hole {
            hole: name.to_string(),
            kinds: None,
        }
    }

    pub fn typed_hole(name: &str, kinds: &[NodeKind]) -> Self {
        PatternNode::Hole {
            hole: name.to_string(),
            kinds: Some(kinds.to_vec()),
        }
    }

    pub fn node(kind: NodeKind, token: Option<&str>, children: Vec<PatternNode>) -> Self {
        PatternNode::Node {
            kind,
            token: token.map(str::to_string),
            children,
        }
    }

    /// Zero-hole pattern equal to `tree`.
    pub fn from_tree(tree: &AstNode) -> Self {
        PatternNode::Node {
            kind: tree.kind,
            token: tree.token.clone(),
            children: tree.children.iter().map(PatternNode::from_tree).collect(),
        }
    }

    /// Hole names in pre-order, with repeats.
    pub fn holes(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_holes(&mut out);
        out
    }

    fn collect_holes<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PatternNode::Hole { hole, .. } => out.push(hole),
            PatternNode::Node { children, .. } => {
                children.iter().for_each(|c| c.collect_holes(out))
            }
        }
    }

    /// Relative paths of concrete (non-hole) nodes, root included.
    pub fn concrete_paths(&self) -> Vec<Path> {
        fn go(p: &PatternNode, path: &mut Path, out: &mut Vec<Path>) {
            if let PatternNode::Node { children, .. } = p {
                out.push(path.clone());
                for (i, c) in children.iter().enumerate() {
                    path.push(i);
                    go(c, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            PatternNode::Hole { .. } => 1,
            PatternNode::Node { children, .. } => {
                1 + children.iter().map(PatternNode::size).sum::<usize>()
            }
        }
    }

    /// Compact rendering: `BinaryOp[+](?x:Identifier, ?y)`.
    pub fn sexpr(&self) -> String {
        match self {
            PatternNode::Hole { hole, kinds } => match kinds {
                Some(k) => format!(
                    "?{hole}:{}",
                    k.iter().map(|k| k.name()).collect::<Vec<_>>().join("|")
                ),
                None => format!("?{hole}"),
            },
            PatternNode::Node {
                kind,
                token,
                children,
            } => {
                let mut s = kind.name().to_string();
                if let Some(t) = token {
                    s.push_str(&format!("[{t}]"));
                }
                if !children.is_empty() {
                    let inner: Vec<String> = children.iter().map(PatternNode::sexpr).collect();
                    s.push_str(&format!("({})", inner.join(", ")));
                }
                s
            }
        }
    }
}

/// One predicate from the closed guard vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "pred", rename_all = "snake_case")]
pub enum Predicate {
    IsNullable { hole: String },
    KindIs { hole: String, kind: NodeKind },
    TokenEquals { hole: String, token: String },
    HasType { hole: String, type_class: TypeClass },
}

impl Predicate {
    pub fn hole(&self) -> &str {
        match self {
            Predicate::IsNullable { hole }
            | Predicate::KindIs { hole, .. }
            | Predicate::TokenEquals { hole, .. }
            | Predicate::HasType { hole, .. } => hole,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guard {
    #[serde(flatten)]
    pub pred: Predicate,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negate: bool,
}

impl Guard {
    pub fn is_nullable(hole: &str) -> Self {
        Guard {
            pred: Predicate::IsNullable { hole: hole.into() },
            negate: false,
        }
    }

    pub fn kind_is(hole: &str, kind: NodeKind) -> Self {
        Guard {
            pred: Predicate::KindIs {
                hole: hole.into(),
                kind,
            },
            negate: false,
        }
    }

    pub fn token_equals(hole: &str, token: &str) -> Self {
        Guard {
            pred: Predicate::TokenEquals {
                hole: hole.into(),
                token: token.into(),
            },
            negate: false,
        }
    }

    pub fn has_type(hole: &str, type_class: TypeClass) -> Self {
        Guard {
            pred: Predicate::HasType {
                hole: hole.into(),
                type_class,
            },
            negate: false,
        }
    }

    pub fn negated(mut self) -> Self {
        self.negate = !self.negate;
        self
    }

    pub fn holds(&self, binding: &Binding, scope: &Scope, dialects: &DialectPair) -> bool {
        let Some(node) = binding.holes.get(self.pred.hole()) else {
            return false;
        };
        let value = match &self.pred {
            Predicate::IsNullable { .. } => scope.is_nullable(node, dialects),
            Predicate::KindIs { kind, .. } => node.kind == *kind,
            Predicate::TokenEquals { token, .. } => node.token() == Some(token.as_str()),
            Predicate::HasType { type_class, .. } => {
                scope.type_of(node, dialects) == Some(*type_class)
            }
        };
        value != self.negate
    }

    pub fn describe(&self) -> String {
        let body = match &self.pred {
            Predicate::IsNullable { hole } => format!("is_nullable({hole})"),
            Predicate::KindIs { hole, kind } => format!("kind_is({hole}, {kind})"),
            Predicate::TokenEquals { hole, token } => format!("token_equals({hole}, {token:?})"),
            Predicate::HasType { hole, type_class } => format!("has_type({hole}, {type_class})"),
        };
        if self.negate {
            format!("not {body}")
        } else {
            body
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Builtin,
    Learned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demos: Vec<String>,
}

pub const BUILTIN_PRIORITY: i64 = 0;
pub const LEARNED_PRIORITY: i64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformRule {
    pub rule_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger: Option<String>,
    pub pattern: PatternNode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub guard: Vec<Guard>,
    pub template: PatternNode,
    pub provenance: Provenance,
    pub priority: i64,
}

impl TransformRule {
    pub fn is_learned(&self) -> bool {
        self.provenance.origin == Origin::Learned
    }

    /// Checks that the template and guards only use holes bound by the pattern
    /// and that repeated holes agree on their kind constraint.
    pub fn check(&self) -> Result<(), String> {
        let mut kinds: BTreeMap<&str, &Option<Vec<NodeKind>>> = BTreeMap::new();
        fn scan<'a>(
            p: &'a PatternNode,
            kinds: &mut BTreeMap<&'a str, &'a Option<Vec<NodeKind>>>,
        ) -> Result<(), String> {
            match p {
                PatternNode::Hole { hole, kinds: k } => match kinds.insert(hole, k) {
                    Some(prev) if prev != k => {
                        Err(format!("hole {hole} has conflicting kind constraints"))
                    }
                    _ => Ok(()),
                },
                PatternNode::Node { children, .. } => {
                    children.iter().try_for_each(|c| scan(c, kinds))
                }
            }
        }
        scan(&self.pattern, &mut kinds)?;
        for h in self.template.holes() {
            if !kinds.contains_key(h) {
                return Err(format!(
                    "{}: template hole {h} is not bound by the pattern",
                    self.rule_id
                ));
            }
        }
        for g in &self.guard {
            if !kinds.contains_key(g.pred.hole()) {
                return Err(format!(
                    "{}: guard on unbound hole {}",
                    self.rule_id,
                    g.pred.hole()
                ));
            }
        }
        Ok(())
    }

    pub fn sort_key(&self) -> (i64, &str) {
        (self.priority, self.rule_id.as_str())
    }

    pub fn describe(&self) -> String {
        let guard = if self.guard.is_empty() {
            String::new()
        } else {
            format!(
                " when {}",
                self.guard
                    .iter()
                    .map(Guard::describe)
                    .collect::<Vec<_>>()
                    .join(" and ")
            )
        };
        format!(
            "{} => {}{}",
            self.pattern.sexpr(),
            self.template.sexpr(),
            guard
        )
    }
}

/// Result of matching a pattern at one subtree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub holes: BTreeMap<String, AstNode>,
    pub match_span: Span,
    /// Absolute path of the matched subtree.
    pub root: Path,
    /// First occurrence of each hole, relative to `root`.
    pub hole_paths: BTreeMap<String, Path>,
}

/// Matches `pattern` against the root of `node` only.
pub fn match_here(pattern: &PatternNode, node: &AstNode, root: &[usize]) -> Option<Binding> {
    let mut binding = Binding {
        holes: BTreeMap::new(),
        match_span: node.span,
        root: root.to_vec(),
        hole_paths: BTreeMap::new(),
    };
    let mut rel = Vec::new();
    if match_rec(pattern, node, &mut rel, &mut binding) {
        Some(binding)
    } else {
        None
    }
}

fn match_rec(pattern: &PatternNode, node: &AstNode, rel: &mut Path, binding: &mut Binding) -> bool {
    match pattern {
        PatternNode::Hole { hole, kinds } => {
            if let Some(k) = kinds {
                if !k.contains(&node.kind) {
                    return false;
                }
            }
            match binding.holes.get(hole) {
                Some(prev) => structural_equal(prev, node),
                None => {
                    binding.holes.insert(hole.clone(), node.clone());
                    binding.hole_paths.insert(hole.clone(), rel.clone());
                    true
                }
            }
        }
        PatternNode::Node {
            kind,
            token,
            children,
        } => {
            if *kind != node.kind || *token != node.token || children.len() != node.children.len() {
                return false;
            }
            for (i, (p, c)) in children.iter().zip(&node.children).enumerate() {
                rel.push(i);
                let ok = match_rec(p, c, rel, binding);
                rel.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }
}

/// Every subtree of `tree` (pre-order) that `pattern` matches.
pub fn find_matches(pattern: &PatternNode, tree: &AstNode) -> Vec<Binding> {
    tree.walk()
        .into_iter()
        .filter_map(|(path, node)| match_here(pattern, node, &path))
        .collect()
}

/// Builds a tree from `template`, resolving holes through `resolve`. Fresh
/// concrete nodes take `span`.
pub fn instantiate(
    template: &PatternNode,
    resolve: &dyn Fn(&str) -> Option<AstNode>,
    span: Span,
) -> Result<AstNode, String> {
    match template {
        PatternNode::Hole { hole, .. } => {
            resolve(hole).ok_or_else(|| format!("unbound template hole {hole}"))
        }
        PatternNode::Node {
            kind,
            token,
            children,
        } => {
            let children: Result<Vec<_>, _> = children
                .iter()
                .map(|c| instantiate(c, resolve, span))
                .collect();
            Ok(AstNode::new(*kind, token.clone(), children?, span))
        }
    }
}
