//! Learns one rule per gap class from the shipped demonstrations and scores
//! the held-out segments.
//!
//! ```text
//! cargo run --example run_eval -- [corpus-dir]
//! ```

use std::path::PathBuf;

use sqlmigrate::baseline::Converter;
use sqlmigrate::corpus::{run_eval, Corpus};
use sqlmigrate::verify::VerifyConfig;

fn main() -> sqlmigrate::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus"));
    let corpus = Corpus::load(&dir)?;
    let result = run_eval(&corpus, Converter::shared(), VerifyConfig::default());
    print!("{}", result.table());
    for case in &result.cases {
        if let Some(rule) = &case.rule {
            println!("{}: {}", case.code, rule.describe());
        }
        for h in case.holdouts.iter().filter(|h| !(h.exact && h.verified)) {
            println!(
                "  holdout {} -> {:?} {:?}",
                h.name, h.output, h.residual_codes
            );
        }
    }
    Ok(())
}
