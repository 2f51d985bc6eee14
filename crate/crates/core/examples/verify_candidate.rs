//! Differential checks of candidate conversions against their source.

use sqlmigrate::ast::SqlSegment;
use sqlmigrate::dialect::DialectProfile;
use sqlmigrate::verify::verify;

fn main() -> sqlmigrate::Result<()> {
    let source = SqlSegment::parse(
        "s",
        "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2",
        DialectProfile::src(),
    )?;
    let candidates = [
        ("faithful", "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(var1, \"string\") AS var2", None),
        (
            "repair",
            "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2",
            Some("E001"),
        ),
        (
            "repair, undeclared",
            "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2",
            None,
        ),
        ("wrong", "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(\"string\", var1) AS var2", None),
        ("ungrammatical", "SELECT var1 +", None),
    ];
    for (label, text, repair) in candidates {
        let r = verify(&source, text, repair);
        println!(
            "{label:<20} grammatical={:<5} equivalent={:<5} divergences={} accepted={}",
            r.grammatical,
            r.equivalent_non_null,
            r.divergences.len(),
            r.accepted
        );
        if let Some(d) = r.divergences.first() {
            println!("{:<20} e.g. {d}", "");
        }
    }
    Ok(())
}
