//! Induction from two demonstrations of the same gap, step by step: changed
//! sites, the shared skeleton, and the final rule replayed on a third input.

use sqlmigrate::ast::SqlSegment;
use sqlmigrate::baseline::Converter;
use sqlmigrate::dialect::DialectProfile;
use sqlmigrate::induction::{changed_sites, induce, Demonstration, Skeleton};

fn main() -> sqlmigrate::Result<()> {
    let conv = Converter::shared();
    let demos = vec![
        Demonstration::new(
            conv,
            "d1",
            "E004",
            "SELECT IIF(a > 1, \"big\", \"small\") FROM t",
            "SELECT CASE WHEN a > 1 THEN \"big\" ELSE \"small\" END FROM t",
        )?,
        Demonstration::new(
            conv,
            "d2",
            "E004",
            "SELECT IIF(b = 0, 1, b) FROM u",
            "SELECT CASE WHEN b = 0 THEN 1 ELSE b END FROM u",
        )?,
    ];

    let sites = changed_sites(conv, &demos)?;
    for s in &sites {
        println!(
            "{} at {:?}: {} -> {}",
            s.demo_id,
            s.path,
            s.source.sexpr(),
            s.target.sexpr()
        );
    }
    let skeleton = Skeleton::build(&sites)?;
    println!("forced holes: {:?}", skeleton.forced().collect::<Vec<_>>());

    let rule = induce(&demos)?;
    println!("{}", rule.describe());
    println!("{}", serde_json::to_string_pretty(&rule)?);

    let fresh = SqlSegment::parse(
        "new",
        "SELECT IIF(c < 0, 0, c) FROM v",
        DialectProfile::src(),
    )?;
    let out = conv.convert(&fresh, &[rule]).outcome;
    println!("{:?}", out.converted_text());

    // Same source, two different fixes: nothing to generalise.
    let clash = [
        Demonstration::new(
            conv,
            "x1",
            "E003",
            "SELECT COALESCE(a, b, c)",
            "SELECT ISNULL(a, ISNULL(b, c))",
        )?,
        Demonstration::new(
            conv,
            "x2",
            "E003",
            "SELECT COALESCE(a, b, c)",
            "SELECT ISNULL(ISNULL(a, b), c)",
        )?,
    ];
    if let Err(e) = induce(&clash) {
        println!("{e}");
    }
    Ok(())
}
