mod support;

use sqlmigrate::baseline::Converter;
use sqlmigrate::induction::{induce, Demonstration};
use support::checks::{oracle_agreement, same_rule, ORACLE_MAX_NODES};
use support::lgg_oracle::{changed_size, lgg_oracle};

fn demos(code: &str, pairs: &[(&str, &str)]) -> Vec<Demonstration> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, (s, t))| {
            Demonstration::new(Converter::shared(), &format!("{code}-{i}"), code, s, t).unwrap()
        })
        .collect()
}

fn assert_agree(set: &[Demonstration]) {
    let conv = Converter::shared();
    let size = changed_size(conv, set).unwrap();
    assert!(size <= ORACLE_MAX_NODES, "site of {size} nodes");
    let a = induce(set).map_err(|e| e.to_string());
    let b = lgg_oracle(conv, set);
    assert!(a.is_ok(), "{a:?}");
    assert!(
        same_rule(&a, &b),
        "induce {:?}\noracle {:?}",
        a.map(|r| r.describe()),
        b.map(|r| r.describe())
    );
}

#[test]
fn induce_matches_the_oracle_on_the_corpus() {
    let stats = oracle_agreement(&support::corpus());
    assert!(stats.compared >= 11);
    assert!(stats.disagreements.is_empty(), "{:?}", stats.disagreements);
}

#[test]
fn oracle_reproduces_the_canonical_rule() {
    let set = demos(
        "E001",
        &[(
            "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2",
            "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2",
        )],
    );
    let rule = lgg_oracle(Converter::shared(), &set).unwrap();
    assert_eq!(
        rule.describe(),
        "BinaryOp[+](?x:Identifier, ?y:StringLit) => FunctionCall[CONCAT](FunctionCall[ISNULL](?x, StringLit[]), ?y) when is_nullable(x)"
    );
}

#[test]
fn agreement_on_larger_sites() {
    assert_agree(&demos(
        "E004",
        &[
            (
                "SELECT IIF(UPPER(a) = \"X\", LEN(b) * 2 + 1, ABS(c - 3)) FROM t",
                "SELECT CASE WHEN UPPER(a) = \"X\" THEN CHAR_LENGTH(b) * 2 + 1 ELSE ABS(c - 3) END FROM t",
            ),
            (
                "SELECT IIF(b < 4, 0, ROUND(a / 3, 2)) FROM t",
                "SELECT CASE WHEN b < 4 THEN 0 ELSE ROUND(a / 3, 2) END FROM t",
            ),
        ],
    ));
    assert_agree(&demos(
        "E003",
        &[(
            "SELECT COALESCE(UPPER(a), LOWER(b), c, \"none\") FROM t",
            "SELECT ISNULL(UPPER(a), ISNULL(LOWER(b), ISNULL(c, \"none\"))) FROM t",
        )],
    ));
    assert_agree(&demos(
        "E002",
        &[(
            "DECLARE a VARCHAR(9) = NULL\nDECLARE b VARCHAR(9) NOT NULL = \"b\"\nSELECT a + \"-\" + b + \"-\" + a",
            "DECLARE a VARCHAR(9) DEFAULT NULL\nDECLARE b VARCHAR(9) NOT NULL DEFAULT \"b\"\nSELECT CONCAT(ISNULL(a, \"\"), \"-\", b, \"-\", ISNULL(a, \"\"))",
        )],
    ));
}

#[test]
fn both_fail_when_demos_disagree() {
    let set = demos(
        "E011",
        &[
            ("SELECT a = TRUE FROM t", "SELECT a = 1 FROM t"),
            ("SELECT b <> FALSE FROM t", "SELECT b <> 0 FROM t"),
        ],
    );
    assert!(induce(&set).is_err());
    assert!(lgg_oracle(Converter::shared(), &set).is_err());
}
