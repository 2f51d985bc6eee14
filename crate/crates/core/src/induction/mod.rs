//! Rule induction from expert demonstrations.
//!
//! Each demonstration is baseline-normalized and diffed against the expert
//! target. The changed subtrees are anti-unified into a pattern, and the
//! targets are covered top-down by holes copied from the source. Guards come
//! from the gap class's recipe. The result must replay every demonstration.

mod diff;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diff::{tree_diff, DiffScript, Edit};

use crate::ast::{structural_equal, AstNode, NodeKind, Path, SqlSegment};
use crate::baseline::{gap_class, ConversionError, Converter, GuardRecipe};
use crate::dialect::TypeClass;
use crate::engine::{Guard, Origin, PatternNode, Provenance, TransformRule, LEARNED_PRIORITY};
use crate::printer::print;
use crate::types::Scope;

pub const MAX_DEMOS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InductionError {
    #[error("invalid demonstrations: {0}")]
    InvalidDemos(String),
    #[error("demonstrations disagree: {0}")]
    InductionConflict(String),
    #[error("target position {path:?} differs across demonstrations and is not copied from the source: {detail}")]
    UnboundTemplateHole { path: Path, detail: String },
    #[error("demonstration {0} does not change the tree")]
    NoChange(String),
}

impl InductionError {
    pub fn kind(&self) -> &'static str {
        match self {
            InductionError::InvalidDemos(_) => "InvalidDemos",
            InductionError::InductionConflict(_) => "InductionConflict",
            InductionError::UnboundTemplateHole { .. } => "UnboundTemplateHole",
            InductionError::NoChange(_) => "NoChange",
        }
    }
}

type Result<T> = std::result::Result<T, InductionError>;

/// Fixture form of a demonstration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoRecord {
    pub demo_id: String,
    pub error_code: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Demonstration {
    pub demo_id: String,
    pub error: ConversionError,
    pub source: SqlSegment,
    pub expert_target: SqlSegment,
}

impl Demonstration {
    /// Parses both sides and picks the first baseline error with `code`.
    pub fn new(
        converter: &Converter,
        demo_id: &str,
        code: &str,
        source: &str,
        target: &str,
    ) -> Result<Self> {
        let invalid = |what: String| InductionError::InvalidDemos(format!("{demo_id}: {what}"));
        let source = SqlSegment::parse(demo_id, source, &converter.dialects.src)
            .map_err(|e| invalid(format!("source does not parse: {e}")))?;
        let expert_target = SqlSegment::parse(demo_id, target, &converter.dialects.tgt)
            .map_err(|e| invalid(format!("target does not parse: {e}")))?;
        let outcome = converter.convert(&source, &[]).outcome;
        let error = outcome
            .errors
            .into_iter()
            .find(|e| e.code == code)
            .ok_or_else(|| invalid(format!("baseline raises no {code}")))?;
        Ok(Demonstration {
            demo_id: demo_id.to_string(),
            error,
            source,
            expert_target,
        })
    }

    pub fn from_record(converter: &Converter, record: &DemoRecord) -> Result<Self> {
        Self::new(
            converter,
            &record.demo_id,
            &record.error_code,
            &record.source,
            &record.target,
        )
    }

    pub fn code(&self) -> &str {
        &self.error.code
    }
}

/// The changed subtree of one demonstration, before and after.
#[derive(Debug, Clone)]
pub struct ChangedSite {
    pub demo_id: String,
    pub path: Path,
    pub source: AstNode,
    pub target: AstNode,
    pub scope: Scope,
}

/// Locates the changed subtree of every demo: the common anchor of the diff,
/// widened to the nearest enclosing node flagged with the demo's code.
pub fn changed_sites(converter: &Converter, demos: &[Demonstration]) -> Result<Vec<ChangedSite>> {
    if demos.is_empty() || demos.len() > MAX_DEMOS {
        return Err(InductionError::InvalidDemos(format!(
            "expected 1 to {MAX_DEMOS} demonstrations, got {}",
            demos.len()
        )));
    }
    let code = demos[0].code();
    if let Some(d) = demos.iter().find(|d| d.code() != code) {
        return Err(InductionError::InvalidDemos(format!(
            "{} is for {}, not {code}",
            d.demo_id,
            d.code()
        )));
    }
    let mut sites = Vec::new();
    for d in demos {
        let (normalized, _) = converter
            .normalize(&d.source.ast)
            .map_err(|e| InductionError::InvalidDemos(format!("{}: {e}", d.demo_id)))?;
        let script = tree_diff(&normalized, &d.expert_target.ast);
        let Some(mut path) = script.common_anchor() else {
            return Err(InductionError::NoChange(d.demo_id.clone()));
        };
        if let Some(flagged) = converter
            .detect(&normalized)
            .into_iter()
            .filter(|f| f.code == code && path.starts_with(&f.path) && path.len() > f.path.len())
            .map(|f| f.path)
            .max_by_key(Vec::len)
        {
            path = flagged;
        }
        let source = normalized.get(&path).cloned();
        let target = d.expert_target.ast.get(&path).cloned();
        let (Some(source), Some(target)) = (source, target) else {
            return Err(InductionError::InvalidDemos(format!(
                "{}: edit outside both trees",
                d.demo_id
            )));
        };
        sites.push(ChangedSite {
            demo_id: d.demo_id.clone(),
            path,
            source,
            target,
            scope: Scope::from_tree(&normalized),
        });
    }
    for (i, a) in sites.iter().enumerate() {
        for b in &sites[i + 1..] {
            if structural_equal(&a.source, &b.source) && !structural_equal(&a.target, &b.target) {
                return Err(InductionError::InductionConflict(format!(
                    "{} and {} fix the same construct differently",
                    a.demo_id, b.demo_id
                )));
            }
        }
    }
    Ok(sites)
}

fn agree<'a>(nodes: impl IntoIterator<Item = &'a AstNode>) -> bool {
    let mut it = nodes.into_iter();
    let Some(first) = it.next() else { return true };
    it.all(|n| {
        n.kind == first.kind && n.token == first.token && n.children.len() == first.children.len()
    })
}

fn at<'a>(sites: &'a [ChangedSite], path: &[usize], target: bool) -> Vec<&'a AstNode> {
    sites
        .iter()
        .map(|s| {
            let root = if target { &s.target } else { &s.source };
            root.get(path).expect("position exists in every demo")
        })
        .collect()
}

/// Positions shared by all changed source subtrees, pre-order. `forced` marks
/// positions whose nodes disagree and so must be generalized.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub positions: Vec<(Path, bool)>,
}

impl Skeleton {
    pub fn build(sites: &[ChangedSite]) -> Result<Skeleton> {
        if !agree(at(sites, &[], false)) {
            return Err(InductionError::InductionConflict(
                "changed constructs have different shapes".to_string(),
            ));
        }
        let mut positions = Vec::new();
        fn walk(sites: &[ChangedSite], path: &mut Path, out: &mut Vec<(Path, bool)>) {
            let nodes = at(sites, path, false);
            let concrete = agree(nodes.iter().copied());
            out.push((path.clone(), !concrete));
            if concrete {
                for i in 0..nodes[0].children.len() {
                    path.push(i);
                    walk(sites, path, out);
                    path.pop();
                }
            }
        }
        walk(sites, &mut Vec::new(), &mut positions);
        Ok(Skeleton { positions })
    }

    /// Non-root positions, pre-order.
    pub fn candidates(&self) -> impl Iterator<Item = &Path> {
        self.positions
            .iter()
            .map(|(p, _)| p)
            .filter(|p| !p.is_empty())
    }

    pub fn forced(&self) -> impl Iterator<Item = &Path> {
        self.positions.iter().filter(|(_, f)| *f).map(|(p, _)| p)
    }
}

fn related(a: &[usize], b: &[usize]) -> bool {
    a.starts_with(b) || b.starts_with(a)
}

/// Template shape before hole naming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Draft {
    /// Copied from this source position.
    Copy(Path),
    Node {
        kind: NodeKind,
        token: Option<String>,
        children: Vec<Draft>,
    },
}

/// Covers the targets top-down. A target position becomes a copy of the first
/// allowed source position whose subtree equals it in every demo; otherwise it
/// must agree across demos.
pub fn cover(
    sites: &[ChangedSite],
    skeleton: &Skeleton,
    allowed: &dyn Fn(&Path) -> bool,
    chosen: &mut Vec<Path>,
) -> Result<Draft> {
    fn go(
        sites: &[ChangedSite],
        skeleton: &Skeleton,
        allowed: &dyn Fn(&Path) -> bool,
        chosen: &mut Vec<Path>,
        q: &mut Path,
    ) -> Result<Draft> {
        let targets = at(sites, q, true);
        let hit = skeleton.candidates().find(|p| {
            allowed(p)
                && chosen.iter().all(|c| c == *p || !related(c, p))
                && at(sites, p, false)
                    .iter()
                    .zip(&targets)
                    .all(|(s, t)| structural_equal(s, t))
        });
        if let Some(p) = hit {
            if !chosen.contains(p) {
                chosen.push(p.clone());
            }
            return Ok(Draft::Copy(p.clone()));
        }
        if !agree(targets.iter().copied()) {
            let shown: Vec<String> = targets.iter().map(|t| t.sexpr()).collect();
            return Err(InductionError::UnboundTemplateHole {
                path: q.clone(),
                detail: shown.join(" vs "),
            });
        }
        let mut children = Vec::new();
        for i in 0..targets[0].children.len() {
            q.push(i);
            children.push(go(sites, skeleton, allowed, chosen, q)?);
            q.pop();
        }
        Ok(Draft::Node {
            kind: targets[0].kind,
            token: targets[0].token.clone(),
            children,
        })
    }
    go(sites, skeleton, allowed, chosen, &mut Vec::new())
}

/// Adds a hole for every forced position not yet generalized, as high up as
/// possible without swallowing a chosen hole.
pub fn lift_forced(skeleton: &Skeleton, chosen: &mut Vec<Path>) {
    let forced: Vec<Path> = skeleton.forced().cloned().collect();
    for f in forced {
        if chosen.iter().any(|c| f.starts_with(c)) {
            continue;
        }
        let lifted = (1..=f.len())
            .map(|n| f[..n].to_vec())
            .find(|a| !chosen.iter().any(|c| c.starts_with(a)))
            .unwrap_or(f);
        chosen.push(lifted);
    }
    chosen.sort();
}

pub fn hole_name(i: usize) -> String {
    const NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    NAMES
        .get(i)
        .map_or_else(|| format!("h{i}"), |n| n.to_string())
}

/// Assigns names to hole positions in pre-order, reusing a name when two
/// positions bind equal subtrees in every demo.
pub fn name_holes(sites: &[ChangedSite], holes: &[Path]) -> Vec<(Path, String)> {
    let mut sorted = holes.to_vec();
    sorted.sort();
    let mut out: Vec<(Path, String)> = Vec::new();
    let mut fresh = 0;
    for p in sorted {
        let mine = at(sites, &p, false);
        let reuse = out.iter().find(|(q, _)| {
            at(sites, q, false)
                .iter()
                .zip(&mine)
                .all(|(a, b)| structural_equal(a, b))
        });
        let name = match reuse {
            Some((_, n)) => n.clone(),
            None => {
                fresh += 1;
                hole_name(fresh - 1)
            }
        };
        out.push((p, name));
    }
    out
}

fn kinds_of(bound: &[&AstNode]) -> Option<Vec<NodeKind>> {
    if !bound.iter().all(|n| n.children.is_empty()) {
        return None;
    }
    Some(
        NodeKind::ALL
            .iter()
            .copied()
            .filter(|k| bound.iter().any(|n| n.kind == *k))
            .collect(),
    )
}

fn pattern_at(sites: &[ChangedSite], names: &[(Path, String)], path: &mut Path) -> PatternNode {
    if let Some((_, name)) = names.iter().find(|(p, _)| p == path) {
        return PatternNode::Hole {
            hole: name.clone(),
            kinds: kinds_of(&at(sites, path, false)),
        };
    }
    let node = sites[0].source.get(path).expect("skeleton position");
    let mut children = Vec::new();
    for i in 0..node.children.len() {
        path.push(i);
        children.push(pattern_at(sites, names, path));
        path.pop();
    }
    PatternNode::Node {
        kind: node.kind,
        token: node.token.clone(),
        children,
    }
}

fn template_of(draft: &Draft, names: &[(Path, String)]) -> PatternNode {
    match draft {
        Draft::Copy(p) => PatternNode::hole(
            &names
                .iter()
                .find(|(q, _)| q == p)
                .expect("copied position is a hole")
                .1,
        ),
        Draft::Node {
            kind,
            token,
            children,
        } => PatternNode::Node {
            kind: *kind,
            token: token.clone(),
            children: children.iter().map(|c| template_of(c, names)).collect(),
        },
    }
}

fn guards_for(
    recipe: GuardRecipe,
    sites: &[ChangedSite],
    names: &[(Path, String)],
    converter: &Converter,
) -> Vec<Guard> {
    let d = &converter.dialects;
    let mut seen: Vec<&str> = Vec::new();
    let mut out = Vec::new();
    for (path, name) in names {
        if seen.contains(&name.as_str()) {
            continue;
        }
        seen.push(name);
        let bound = at(sites, path, false);
        let all = |f: &dyn Fn(&AstNode, &Scope) -> bool| {
            bound.iter().zip(sites).all(|(n, s)| f(n, &s.scope))
        };
        match recipe {
            GuardRecipe::None => {}
            GuardRecipe::NullableHoles => {
                if all(&|n, s| s.is_nullable(n, d)) {
                    out.push(Guard::is_nullable(name));
                }
            }
            GuardRecipe::MixedNullability => {
                if !all(&|n, _| n.kind == NodeKind::Identifier) {
                    continue;
                }
                if all(&|n, s| s.is_nullable(n, d)) {
                    out.push(Guard::is_nullable(name));
                } else if all(&|n, s| !s.is_nullable(n, d)) {
                    out.push(Guard::is_nullable(name).negated());
                }
            }
            GuardRecipe::DateHoles => {
                if all(&|n, s| s.type_of(n, d) == Some(TypeClass::Date)) {
                    out.push(Guard::has_type(name, TypeClass::Date));
                }
            }
        }
    }
    out
}

/// Builds the rule for a fixed hole set and template draft.
pub fn assemble(
    converter: &Converter,
    demos: &[Demonstration],
    sites: &[ChangedSite],
    holes: &[Path],
    draft: &Draft,
    priority: i64,
) -> TransformRule {
    let code = demos[0].code();
    let names = name_holes(sites, holes);
    let recipe = gap_class(code).map_or(GuardRecipe::None, |g| g.recipe);
    TransformRule {
        rule_id: format!("learned-{code}"),
        trigger: Some(code.to_string()),
        pattern: pattern_at(sites, &names, &mut Vec::new()),
        guard: guards_for(recipe, sites, &names, converter),
        template: template_of(draft, &names),
        provenance: Provenance {
            origin: Origin::Learned,
            demos: demos.iter().map(|d| d.demo_id.clone()).collect(),
        },
        priority,
    }
}

/// Expert target in canonical form.
pub fn expected_text(converter: &Converter, demo: &Demonstration) -> Result<String> {
    print(&demo.expert_target.ast, &converter.dialects.tgt).map_err(|e| {
        InductionError::InvalidDemos(format!("{}: target does not print: {e}", demo.demo_id))
    })
}

/// Checks that `rule` plus the baseline reproduces every expert target.
pub fn check_replay(
    converter: &Converter,
    rule: &TransformRule,
    demos: &[Demonstration],
) -> Result<()> {
    for d in demos {
        let want = expected_text(converter, d)?;
        let got = converter
            .convert(&d.source, std::slice::from_ref(rule))
            .outcome;
        match got.converted_text() {
            Some(text) if text == want => {}
            Some(text) => {
                return Err(InductionError::InductionConflict(format!(
                    "rule does not replay {}: produced {text:?}",
                    d.demo_id
                )))
            }
            None => {
                let codes: Vec<&str> = got.errors.iter().map(|e| e.code.as_str()).collect();
                return Err(InductionError::InductionConflict(format!(
                    "rule does not replay {}: still fails with {}",
                    d.demo_id,
                    codes.join(", ")
                )));
            }
        }
    }
    Ok(())
}

pub fn induce_with(
    converter: &Converter,
    demos: &[Demonstration],
    priority: i64,
) -> Result<TransformRule> {
    let sites = changed_sites(converter, demos)?;
    let skeleton = Skeleton::build(&sites)?;
    let mut chosen = Vec::new();
    let draft = cover(&sites, &skeleton, &|_| true, &mut chosen)?;
    lift_forced(&skeleton, &mut chosen);
    let rule = assemble(converter, demos, &sites, &chosen, &draft, priority);
    check_replay(converter, &rule, demos)?;
    Ok(rule)
}

/// Induces a rule from 1 to 8 demonstrations of one error code.
pub fn induce(demos: &[Demonstration]) -> Result<TransformRule> {
    induce_with(Converter::shared(), demos, LEARNED_PRIORITY)
}
