//! One segment per gap class, run through the builtin rules, with the errors
//! reported as JSON lines.

use sqlmigrate::ast::SqlSegment;
use sqlmigrate::baseline::{baseline_convert, gap_list, report_lines};
use sqlmigrate::dialect::DialectProfile;

const SAMPLES: &[&str] = &[
    "SELECT LEN(name), GETDATE() FROM t",
    "DECLARE a VARCHAR(10) = NULL\nSELECT a + \"x\"",
    "DECLARE a VARCHAR(10) = NULL\nSELECT \"<\" + a + \">\"",
    "SELECT COALESCE(a, b, c) FROM t",
    "SELECT IIF(a > 1, \"big\", \"small\") FROM t",
    "SELECT CONVERT(VARCHAR(10), a) FROM t",
    "DECLARE d DATE = NULL\nSELECT d + 1",
    "SELECT UPPER(GETDATE()) FROM t",
    "SELECT TOP (n) a FROM t",
    "SELECT users.name FROM users",
    "DECLARE n INT = 1\nSELECT \"n=\" + n",
    "SELECT flag = TRUE AS on_flag FROM t",
];

fn main() -> sqlmigrate::Result<()> {
    for (code, name) in gap_list() {
        println!("{code} {name}");
    }
    let mut outcomes = Vec::new();
    for (i, text) in SAMPLES.iter().enumerate() {
        let segment = SqlSegment::parse(&format!("sample#{i}"), text, DialectProfile::src())?;
        let outcome = baseline_convert(&segment);
        match outcome.converted_text() {
            Some(out) => println!("ok    {}", out.replace('\n', " | ")),
            None => println!("fail  {}", text.replace('\n', " | ")),
        }
        outcomes.push(outcome);
    }
    print!("{}", report_lines(&outcomes));
    Ok(())
}
