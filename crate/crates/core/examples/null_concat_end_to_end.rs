//! The canonical case: a nullable variable concatenated with a string. The
//! baseline refuses it, one expert fix teaches a rule, and the same input then
//! converts.

use sqlmigrate::ast::SqlSegment;
use sqlmigrate::baseline::{baseline_convert, Converter};
use sqlmigrate::dialect::DialectProfile;
use sqlmigrate::induction::{induce, Demonstration};
use sqlmigrate::verify::verify;

const SOURCE: &str = "DECLARE var1 VARCHAR(20) = NULL\nSELECT var1 + \"string\" AS var2";
const EXPERT: &str =
    "DECLARE var1 VARCHAR(20) DEFAULT NULL\nSELECT CONCAT(ISNULL(var1, \"\"), \"string\") AS var2";

fn main() -> sqlmigrate::Result<()> {
    let segment = SqlSegment::parse("null-concat", SOURCE, DialectProfile::src())?;

    let before = baseline_convert(&segment);
    for e in &before.errors {
        println!("[{}] {}", e.code, e.message);
    }

    let demo = Demonstration::new(Converter::shared(), "null-concat", "E001", SOURCE, EXPERT)?;
    let rule = induce(&[demo])?;
    println!("rule: {}", rule.describe());

    let after = Converter::shared()
        .convert(&segment, std::slice::from_ref(&rule))
        .outcome;
    let text = after
        .converted_text()
        .expect("learned rule converts the segment");
    println!("{text}");

    let report = verify(&segment, text, Some("E001"));
    println!(
        "grammatical={} equivalent_non_null={} divergences={} accepted={}",
        report.grammatical,
        report.equivalent_non_null,
        report.divergences.len(),
        report.accepted
    );
    for d in &report.divergences {
        println!("  {d}");
    }
    Ok(())
}
