use std::cmp::Ordering;
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::value::{Environment, Value};
use crate::ast::{AstNode, NodeKind, SqlSegment};
use crate::dialect::{DialectPair, StringConcat, TypeClass};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{0}")]
pub struct EvalError(pub String);

type Result<T> = std::result::Result<T, EvalError>;

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(EvalError(msg.into()))
}

/// Fixed clock so both sides agree on the current date.
pub const NOW_DAYS: i64 = 19000;

struct Evaluator<'a> {
    dialects: &'a DialectPair,
    plus_concat: bool,
    env: Environment,
}

/// Evaluates every SELECT item of `segment`, in order.
pub fn evaluate(
    segment: &SqlSegment,
    env: &Environment,
    dialects: &DialectPair,
) -> Result<Vec<Value>> {
    let profile = if segment.dialect == dialects.tgt.name {
        &dialects.tgt
    } else {
        &dialects.src
    };
    evaluate_tree(
        &segment.ast,
        env,
        dialects,
        profile.string_concat == StringConcat::PlusOperator,
    )
}

pub fn evaluate_tree(
    tree: &AstNode,
    env: &Environment,
    dialects: &DialectPair,
    plus_concat: bool,
) -> Result<Vec<Value>> {
    let mut ev = Evaluator {
        dialects,
        plus_concat,
        env: env.clone(),
    };
    let mut out = Vec::new();
    let stmts: Vec<&AstNode> = if tree.kind == NodeKind::Script {
        tree.children.iter().collect()
    } else {
        vec![tree]
    };
    for stmt in stmts {
        match stmt.kind {
            NodeKind::DeclareStmt => {
                let name = stmt.children[0].token().unwrap_or("");
                if ev.env.get(name).is_none() {
                    let v = match stmt.children.get(2) {
                        Some(init) => ev.eval(init)?,
                        None => Value::Null,
                    };
                    ev.env.set(name, v);
                }
            }
            NodeKind::SelectStmt => {
                for item in stmt
                    .children
                    .iter()
                    .filter(|c| c.kind != NodeKind::LimitClause)
                {
                    out.push(ev.eval(item)?);
                }
            }
            _ => out.push(ev.eval(stmt)?),
        }
    }
    Ok(out)
}

fn num(v: &Value) -> Result<Decimal> {
    match v {
        Value::Num(n) => Ok(*n),
        Value::Bool(b) => Ok(Decimal::from(*b as i64)),
        other => fail(format!("expected a number, got {other}")),
    }
}

fn truthy(v: &Value) -> Result<bool> {
    match v {
        Value::Null => Ok(false),
        Value::Bool(b) => Ok(*b),
        Value::Num(n) => Ok(!n.is_zero()),
        Value::Str(s) => fail(format!("string {s:?} used as a condition")),
    }
}

fn compare(a: &Value, b: &Value) -> Result<Option<Ordering>> {
    Ok(match (a, b) {
        (Value::Null, _) | (_, Value::Null) => None,
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (Value::Str(_), _) | (_, Value::Str(_)) => {
            return fail("comparison between a string and a non-string")
        }
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        (x, y) => Some(num(x)?.cmp(&num(y)?)),
    })
}

fn cast(v: Value, class: Option<TypeClass>) -> Result<Value> {
    if v.is_null() {
        return Ok(Value::Null);
    }
    match class {
        Some(TypeClass::String) => Ok(Value::Str(v.text().unwrap_or_default())),
        Some(TypeClass::Number) | Some(TypeClass::Date) => match &v {
            Value::Str(s) => Decimal::from_str(s.trim())
                .map(Value::Num)
                .or_else(|_| fail(format!("cannot convert {s:?} to a number"))),
            other => Ok(Value::Num(num(other)?)),
        },
        Some(TypeClass::Bool) => Ok(Value::Bool(truthy(&v)?)),
        None => fail("cast to an unknown type"),
    }
}

impl Evaluator<'_> {
    fn eval(&mut self, node: &AstNode) -> Result<Value> {
        match node.kind {
            NodeKind::NullLit => Ok(Value::Null),
            NodeKind::StringLit => Ok(Value::Str(node.token().unwrap_or("").to_string())),
            NodeKind::BoolLit => Ok(Value::Bool(node.token() == Some("TRUE"))),
            NodeKind::NumberLit => Decimal::from_str(node.token().unwrap_or(""))
                .map(Value::Num)
                .or_else(|_| fail("bad number literal")),
            NodeKind::Identifier => {
                let name = node.token().unwrap_or("");
                match self.env.get(name) {
                    Some(v) => Ok(v.clone()),
                    None => fail(format!("unbound identifier {name}")),
                }
            }
            NodeKind::Alias => self.eval(&node.children[0]),
            NodeKind::CastExpr => {
                let v = self.eval(&node.children[0])?;
                cast(
                    v,
                    TypeClass::of_type_name(node.children[1].token().unwrap_or("")),
                )
            }
            NodeKind::CaseExpr => {
                let has_else = node.token() == Some("ELSE");
                let n = node.children.len();
                let pairs = if has_else { n - 1 } else { n };
                for pair in node.children[..pairs].chunks(2) {
                    if truthy(&self.eval(&pair[0])?)? {
                        return self.eval(&pair[1]);
                    }
                }
                if has_else {
                    self.eval(&node.children[n - 1])
                } else {
                    Ok(Value::Null)
                }
            }
            NodeKind::BinaryOp => self.binary(node),
            NodeKind::FunctionCall => self.call(node),
            other => fail(format!("cannot evaluate {other}")),
        }
    }

    fn binary(&mut self, node: &AstNode) -> Result<Value> {
        let op = node.token().unwrap_or("");
        if op == "." {
            return self.eval(&node.children[1]);
        }
        let a = self.eval(&node.children[0])?;
        let b = self.eval(&node.children[1])?;
        match op {
            "=" | "<>" | "!=" | "<" | ">" | "<=" | ">=" => Ok(match compare(&a, &b)? {
                None => Value::Null,
                Some(o) => Value::Bool(match op {
                    "=" => o == Ordering::Equal,
                    "<>" | "!=" => o != Ordering::Equal,
                    "<" => o == Ordering::Less,
                    ">" => o == Ordering::Greater,
                    "<=" => o != Ordering::Greater,
                    _ => o != Ordering::Less,
                }),
            }),
            "||" => match (a.text(), b.text()) {
                (Some(x), Some(y)) => Ok(Value::Str(x + &y)),
                _ => Ok(Value::Null),
            },
            "+" => {
                if matches!(a, Value::Bool(_)) || matches!(b, Value::Bool(_)) {
                    return fail("`+` on a boolean");
                }
                let stringy = matches!(a, Value::Str(_)) || matches!(b, Value::Str(_));
                if stringy && !self.plus_concat {
                    return fail("`+` on a string");
                }
                if a.is_null() || b.is_null() {
                    return Ok(Value::Null);
                }
                if stringy {
                    return Ok(Value::Str(
                        a.text().unwrap_or_default() + &b.text().unwrap_or_default(),
                    ));
                }
                num(&a)?
                    .checked_add(num(&b)?)
                    .map(Value::Num)
                    .ok_or_else(|| EvalError("overflow".into()))
            }
            "-" | "*" | "/" => {
                if a.is_null() || b.is_null() {
                    return Ok(Value::Null);
                }
                let (x, y) = (num(&a)?, num(&b)?);
                let r = match op {
                    "-" => x.checked_sub(y),
                    "*" => x.checked_mul(y),
                    _ if y.is_zero() => return fail("division by zero"),
                    _ => x.checked_div(y),
                };
                r.map(Value::Num)
                    .ok_or_else(|| EvalError("overflow".into()))
            }
            _ => fail(format!("unknown operator {op}")),
        }
    }

    fn call(&mut self, node: &AstNode) -> Result<Value> {
        let name = node.token().unwrap_or("");
        let Some((canonical, _)) = self.dialects.canonical(name) else {
            return fail(format!("unknown function {name}"));
        };
        if canonical == "convert" {
            let v = self.eval(&node.children[1])?;
            return cast(
                v,
                TypeClass::of_type_name(node.children[0].token().unwrap_or("")),
            );
        }
        if canonical == "iif" {
            let c = self.eval(&node.children[0])?;
            return self.eval(&node.children[if truthy(&c)? { 1 } else { 2 }]);
        }
        let args = node
            .children
            .iter()
            .map(|c| self.eval(c))
            .collect::<Result<Vec<_>>>()?;
        let text = |v: &Value| v.text();
        match canonical {
            "current_timestamp" => Ok(Value::Num(Decimal::from(NOW_DAYS))),
            "null_coalesce" | "coalesce" => Ok(args
                .into_iter()
                .find(|v| !v.is_null())
                .unwrap_or(Value::Null)),
            "concat" => Ok(args
                .iter()
                .map(text)
                .collect::<Option<Vec<_>>>()
                .map_or(Value::Null, |parts| Value::Str(parts.concat()))),
            _ if args.iter().any(Value::is_null) => Ok(Value::Null),
            "abs" => Ok(Value::Num(num(&args[0])?.abs())),
            "round" => {
                let dp = num(&args[1])?;
                if dp.is_sign_negative() || !dp.fract().is_zero() {
                    return fail("ROUND takes a non-negative whole number of places");
                }
                let dp = dp.to_u32().unwrap_or(28);
                Ok(Value::Num(num(&args[0])?.round_dp_with_strategy(
                    dp,
                    RoundingStrategy::MidpointAwayFromZero,
                )))
            }
            "char_length" => Ok(Value::Num(Decimal::from(
                text(&args[0]).unwrap_or_default().chars().count(),
            ))),
            "lower" | "upper" => match &args[0] {
                Value::Str(s) if canonical == "lower" => Ok(Value::Str(s.to_lowercase())),
                Value::Str(s) => Ok(Value::Str(s.to_uppercase())),
                other => fail(format!("{name} on {other}")),
            },
            "date_add" => Ok(Value::Num(
                num(&args[0])?
                    .checked_add(num(&args[1])?)
                    .ok_or_else(|| EvalError("overflow".into()))?,
            )),
            other => fail(format!("no semantics for {other}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::DialectProfile;

    fn run(text: &str, tgt: bool, env: &Environment) -> Result<Vec<Value>> {
        let d = if tgt {
            DialectProfile::tgt()
        } else {
            DialectProfile::src()
        };
        let seg = SqlSegment::parse("t", text, d).unwrap();
        evaluate(&seg, env, &DialectPair::builtin())
    }

    fn s(v: &str) -> Value {
        Value::Str(v.into())
    }

    #[test]
    fn plus_concat_propagates_null_in_src() {
        let env = Environment::new().with("var1", Value::Null);
        assert_eq!(
            run("SELECT var1 + \"string\"", false, &env).unwrap(),
            vec![Value::Null]
        );
        assert_eq!(
            run("SELECT \"a\" + \"b\"", false, &Environment::new()).unwrap(),
            vec![s("ab")]
        );
    }

    #[test]
    fn isnull_repairs_the_concat_in_tgt() {
        let env = Environment::new().with("var1", Value::Null);
        assert_eq!(
            run("SELECT CONCAT(ISNULL(var1, \"\"), \"string\")", true, &env).unwrap(),
            vec![s("string")]
        );
        assert_eq!(
            run("SELECT CONCAT(var1, \"x\")", true, &env).unwrap(),
            vec![Value::Null]
        );
    }

    #[test]
    fn tgt_plus_on_strings_is_an_error() {
        assert!(run("SELECT a + 1", true, &Environment::new().with("a", s("x"))).is_err());
    }

    #[test]
    fn inputs_override_initializers() {
        let env = Environment::new().with("v", s("in"));
        assert_eq!(
            run("DECLARE v VARCHAR(5) = \"init\" SELECT v", false, &env).unwrap(),
            vec![s("in")]
        );
        assert_eq!(
            run(
                "DECLARE v VARCHAR(5) = \"init\" SELECT v",
                false,
                &Environment::new()
            )
            .unwrap(),
            vec![s("init")]
        );
    }

    #[test]
    fn exact_decimal_arithmetic_and_casts() {
        let env = Environment::new().with("n", Value::Num(Decimal::new(150, 2)));
        assert_eq!(
            run(
                "SELECT n * 2, CAST(n AS VARCHAR(10)), CONVERT(VARCHAR(10), n), ROUND(n, 0)",
                false,
                &env
            )
            .unwrap(),
            vec![
                Value::Num(Decimal::new(3, 0)),
                s("1.50"),
                s("1.50"),
                Value::Num(Decimal::new(2, 0))
            ]
        );
    }

    #[test]
    fn three_valued_comparisons() {
        let env = Environment::new()
            .with("f", Value::Num(Decimal::ONE))
            .with("g", Value::Null);
        assert_eq!(
            run(
                "SELECT f = TRUE, g = 1, IIF(g = 1, \"y\", \"n\")",
                false,
                &env
            )
            .unwrap(),
            vec![Value::Bool(true), Value::Null, s("n")]
        );
    }
}
