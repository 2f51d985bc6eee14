//! Grammatical and semantic checks on converted segments.
//!
//! A candidate is compared with its source on seeded random environments with
//! no NULL inputs, then on a NULL/non-NULL grid over the nullable inputs. Grid
//! divergences are tolerated only for gap classes registered as intentional
//! repairs.

mod eval;
mod value;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

pub use eval::{evaluate, evaluate_tree, EvalError, NOW_DAYS};
pub use value::{Environment, Value};

use crate::ast::{AstNode, NodeKind, SqlSegment};
use crate::baseline::is_intentional_repair;
use crate::dialect::{DialectPair, TypeClass};
use crate::types::Scope;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 100;
pub const MAX_GRID_VARS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
        }
    }
}

/// What one side produced in one environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    Values(Vec<Value>),
    Error(String),
}

impl Observed {
    fn of(r: Result<Vec<Value>, EvalError>) -> Self {
        match r {
            Ok(v) => Observed::Values(v),
            Err(e) => Observed::Error(e.0),
        }
    }

    /// Two errors count as agreement.
    fn agrees(&self, other: &Observed) -> bool {
        match (self, other) {
            (Observed::Error(_), Observed::Error(_)) => true,
            (a, b) => a == b,
        }
    }
}

impl std::fmt::Display for Observed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Observed::Values(v) => {
                let parts: Vec<String> = v.iter().map(Value::to_string).collect();
                write!(f, "{}", parts.join(", "))
            }
            Observed::Error(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub env: Environment,
    pub source: Observed,
    pub target: Observed,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> ({}, {})", self.env, self.source, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub grammatical: bool,
    pub equivalent_non_null: bool,
    pub divergences: Vec<Divergence>,
    pub intentional_repair: Option<String>,
    pub accepted: bool,
    pub environments_checked: usize,
    pub seed: u64,
}

/// An input of the segment pair and how to draw values for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputVar {
    pub name: String,
    pub class: TypeClass,
    pub type_name: Option<String>,
    pub nullable: bool,
}

fn base_type(type_name: &str) -> String {
    type_name
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_uppercase()
}

/// Type an undeclared identifier at `path` is sampled with, read off its
/// surroundings the way the converter would see them.
fn context_type(
    tree: &AstNode,
    path: &[usize],
    scope: &Scope,
    dialects: &DialectPair,
) -> (TypeClass, Option<&'static str>) {
    let Some((&index, up)) = path.split_last() else {
        return (TypeClass::String, None);
    };
    let parent = tree.get(up).expect("parent exists");
    let others = || {
        parent
            .children
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != index)
            .map(|(_, c)| c)
    };
    match parent.kind {
        NodeKind::BinaryOp => {
            if let Some(s) = others().next() {
                if s.kind == NodeKind::BoolLit {
                    return (TypeClass::Number, Some("BIT"));
                }
                if let Some(c) = scope.type_of(s, dialects) {
                    return (c, None);
                }
            }
            return match parent.token() {
                Some("||" | "." | "=" | "<>" | "!=" | "<" | ">" | "<=" | ">=") | None => {
                    (TypeClass::String, None)
                }
                Some(_) => (TypeClass::Number, None),
            };
        }
        NodeKind::LimitClause => return (TypeClass::Number, Some("INT")),
        NodeKind::CaseExpr => {
            let is_else = parent.token() == Some("ELSE") && index == parent.children.len() - 1;
            if index % 2 == 0 && !is_else {
                return (TypeClass::Bool, None);
            }
            let results = parent.children.iter().enumerate().filter(|(i, _)| {
                *i != index
                    && (i % 2 == 1
                        || (parent.token() == Some("ELSE") && *i == parent.children.len() - 1))
            });
            return match results
                .filter_map(|(_, c)| scope.type_of(c, dialects))
                .next()
            {
                Some(c) => (c, None),
                None => context_type(tree, up, scope, dialects),
            };
        }
        NodeKind::FunctionCall => {
            let canonical = parent
                .token()
                .and_then(|t| dialects.canonical(t))
                .map(|(c, _)| c);
            match (canonical, index) {
                (Some("abs" | "round"), 0) | (Some("date_add"), 1) => {
                    return (TypeClass::Number, None)
                }
                (Some("round"), 1) => return (TypeClass::Number, Some("INT")),
                (Some("date_add"), 0) => return (TypeClass::Date, None),
                (Some("iif"), 0) => return (TypeClass::Bool, None),
                (Some("null_coalesce" | "coalesce"), _) => {
                    return match others().find_map(|s| scope.type_of(s, dialects)) {
                        Some(c) => (c, None),
                        None => context_type(tree, up, scope, dialects),
                    };
                }
                _ => {}
            }
        }
        _ => {}
    }
    (TypeClass::String, None)
}

/// Declared variables and free identifiers of `trees`, by name.
pub fn input_vars(trees: &[&AstNode], dialects: &DialectPair) -> Vec<InputVar> {
    let mut vars: BTreeMap<String, InputVar> = BTreeMap::new();
    for tree in trees {
        let scope = Scope::from_tree(tree);
        for (name, decl) in scope.iter() {
            vars.entry(name.clone()).or_insert_with(|| InputVar {
                name: name.clone(),
                class: decl.class.unwrap_or(TypeClass::String),
                type_name: Some(decl.type_name.clone()),
                nullable: decl.nullable(),
            });
        }
    }
    for tree in trees {
        let scope = Scope::from_tree(tree);
        for (path, node) in tree.walk() {
            if node.kind != NodeKind::Identifier {
                continue;
            }
            let Some((&index, up)) = path.split_last() else {
                continue;
            };
            let parent = tree.get(up).expect("parent exists");
            let skip = match parent.kind {
                NodeKind::Alias | NodeKind::DeclareStmt => true,
                NodeKind::BinaryOp => parent.token() == Some(".") && index == 0,
                _ => false,
            };
            let name = node.token().unwrap_or("").to_ascii_lowercase();
            if skip || vars.contains_key(&name) {
                continue;
            }
            let (class, type_name) = context_type(tree, &path, &scope, dialects);
            vars.insert(
                name.clone(),
                InputVar {
                    name,
                    class,
                    type_name: type_name.map(str::to_string),
                    nullable: true,
                },
            );
        }
    }
    vars.into_values().collect()
}

fn sample(var: &InputVar, rng: &mut ChaCha8Rng) -> Value {
    let base = var.type_name.as_deref().map(base_type).unwrap_or_default();
    match var.class {
        TypeClass::String => {
            let len = rng.gen_range(0..=8);
            Value::Str(
                (0..len)
                    .map(|_| rng.gen_range(b'a'..=b'z') as char)
                    .collect(),
            )
        }
        TypeClass::Number if base == "BIT" => Value::Num(Decimal::from(rng.gen_range(0..=1))),
        TypeClass::Number
            if matches!(
                base.as_str(),
                "INT" | "INTEGER" | "BIGINT" | "SMALLINT" | "TINYINT"
            ) =>
        {
            Value::Num(Decimal::from(rng.gen_range(-100..=100)))
        }
        TypeClass::Number => Value::Num(Decimal::new(rng.gen_range(-10_000..=10_000), 2)),
        TypeClass::Date => Value::Num(Decimal::from(NOW_DAYS + rng.gen_range(-1000..=1000))),
        TypeClass::Bool => Value::Bool(rng.gen_bool(0.5)),
    }
}

/// `samples` environments with no NULL bindings, reproducible from `seed`.
pub fn random_environments(vars: &[InputVar], seed: u64, samples: usize) -> Vec<Environment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut env = Environment {
                bindings: BTreeMap::new(),
                seeded_by: Some(seed),
            };
            for v in vars {
                env.set(&v.name, sample(v, &mut rng));
            }
            env
        })
        .collect()
}

/// Every way of setting a subset (non-empty) of the first nullable inputs to NULL in `base`.
pub fn null_grid(vars: &[InputVar], base: &Environment) -> Vec<Environment> {
    let nullable: Vec<&InputVar> = vars
        .iter()
        .filter(|v| v.nullable)
        .take(MAX_GRID_VARS)
        .collect();
    (1u32..(1 << nullable.len()))
        .map(|mask| {
            let mut env = base.clone();
            for (i, v) in nullable.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    env.set(&v.name, Value::Null);
                }
            }
            env
        })
        .collect()
}

pub fn verify(source: &SqlSegment, candidate: &str, repair: Option<&str>) -> VerificationReport {
    verify_with(
        source,
        candidate,
        repair,
        DialectPair::builtin_ref(),
        VerifyConfig::default(),
    )
}

pub fn verify_with(
    source: &SqlSegment,
    candidate: &str,
    repair: Option<&str>,
    dialects: &DialectPair,
    config: VerifyConfig,
) -> VerificationReport {
    let intentional_repair = repair
        .filter(|c| is_intentional_repair(c))
        .map(str::to_string);
    let mut report = VerificationReport {
        grammatical: false,
        equivalent_non_null: false,
        divergences: Vec::new(),
        intentional_repair,
        accepted: false,
        environments_checked: 0,
        seed: config.seed,
    };
    let Ok(target) = SqlSegment::parse(&source.segment_id, candidate, &dialects.tgt) else {
        return report;
    };
    report.grammatical = true;
    let vars = input_vars(&[&source.ast, &target.ast], dialects);
    let envs = random_environments(&vars, config.seed, config.samples.max(1));
    let grid = null_grid(&vars, &envs[0]);
    let mut non_null_ok = true;
    let mut grid_diverged = false;
    for (env, on_grid) in envs
        .iter()
        .map(|e| (e, false))
        .chain(grid.iter().map(|e| (e, true)))
    {
        report.environments_checked += 1;
        let s = Observed::of(evaluate(source, env, dialects));
        let t = Observed::of(evaluate(&target, env, dialects));
        // The source has no value here, so any target behaviour refines it.
        if matches!(s, Observed::Error(_)) || s.agrees(&t) {
            continue;
        }
        if on_grid {
            grid_diverged = true;
        } else {
            non_null_ok = false;
        }
        report.divergences.push(Divergence {
            env: env.clone(),
            source: s,
            target: t,
        });
    }
    report.equivalent_non_null = non_null_ok;
    report.accepted = non_null_ok && (!grid_diverged || report.intentional_repair.is_some());
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::DialectProfile;

    const NULL_CONCAT_SRC: &str =
        "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2";
    const NULL_CONCAT_OUT: &str = "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2";

    fn src(t: &str) -> SqlSegment {
        SqlSegment::parse("t#0", t, DialectProfile::src()).unwrap()
    }

    #[test]
    fn concat_repair_diverges_only_on_null() {
        let r = verify(&src(NULL_CONCAT_SRC), NULL_CONCAT_OUT, Some("E001"));
        assert!(r.grammatical && r.equivalent_non_null && r.accepted);
        assert_eq!(r.divergences.len(), 1);
        let d = &r.divergences[0];
        assert_eq!(d.env.get("var1"), Some(&Value::Null));
        assert_eq!(d.source, Observed::Values(vec![Value::Null]));
        assert_eq!(
            d.target,
            Observed::Values(vec![Value::Str("string".into())])
        );
    }

    #[test]
    fn null_divergence_needs_a_registered_repair() {
        assert!(!verify(&src(NULL_CONCAT_SRC), NULL_CONCAT_OUT, None).accepted);
        assert!(!verify(&src(NULL_CONCAT_SRC), NULL_CONCAT_OUT, Some("E004")).accepted);
    }

    #[test]
    fn src_text_is_not_grammatical_tgt() {
        let r = verify(&src(NULL_CONCAT_SRC), NULL_CONCAT_SRC, Some("E001"));
        assert!(!r.grammatical && !r.accepted);
    }

    #[test]
    fn wrong_literal_is_caught() {
        let r = verify(
            &src(NULL_CONCAT_SRC),
            &NULL_CONCAT_OUT.replace("\"string\"", "\"strinG\""),
            Some("E001"),
        );
        assert!(!r.equivalent_non_null);
        assert!(r.divergences.iter().any(|d| !d.env.has_null()));
    }

    #[test]
    fn environments_are_reproducible() {
        let seg = src("SELECT a + b, n * 2, d + 1");
        let vars = input_vars(&[&seg.ast], &DialectPair::builtin());
        assert_eq!(
            random_environments(&vars, 7, 5),
            random_environments(&vars, 7, 5)
        );
        assert_ne!(
            random_environments(&vars, 7, 5),
            random_environments(&vars, 8, 5)
        );
        let n = vars.iter().find(|v| v.name == "n").unwrap();
        assert_eq!(n.class, TypeClass::Number);
    }

    #[test]
    fn not_null_inputs_stay_off_the_grid() {
        let seg =
            src("DECLARE a VARCHAR(5) NOT NULL = \"x\" DECLARE b VARCHAR(5) = NULL SELECT a + b");
        let vars = input_vars(&[&seg.ast], &DialectPair::builtin());
        let envs = random_environments(&vars, 1, 1);
        let grid = null_grid(&vars, &envs[0]);
        assert_eq!(grid.len(), 1);
        assert_eq!(grid[0].get("b"), Some(&Value::Null));
    }
}
